from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from outerlip.boundary import ChordProduct
from outerlip.outer import OuterEvaluator

settings.register_profile("outerlip", max_examples=25, deadline=None)
settings.load_profile("outerlip")

# criterion lines recorded by test_acceptance, echoed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def chord_ev() -> OuterEvaluator:
    """Evaluator for h = |xi - 1|, whose outer function is 1 - z."""
    return OuterEvaluator(ChordProduct([(0.0, 1.0)]))


@pytest.fixture(scope="session")
def sqrt_ev() -> OuterEvaluator:
    """Evaluator for h = |xi - 1|**(1/2), whose outer function is (1 - z)**(1/2)."""
    return OuterEvaluator(ChordProduct([(0.0, 0.5)]))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
