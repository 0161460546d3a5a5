from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from outerlip.quadrature import (adaptive, adaptive_cells, cell_nodes, composite,
                                 gauss_legendre, geometric_offsets, graded_breaks,
                                 truncation_limit)


def test_gauss_legendre_matches_numpy():
    x, w = gauss_legendre(16)
    xr, wr = np.polynomial.legendre.leggauss(16)
    np.testing.assert_allclose(np.sort(x), np.sort(xr), atol=1e-15)
    assert math.isclose(w.sum(), 2.0, rel_tol=1e-14)


def test_gauss_legendre_exact_for_degree_31():
    x, w = gauss_legendre(16)
    assert abs(np.sum(w * x ** 30) - 2.0 / 31.0) < 1e-14
    assert abs(np.sum(w * x ** 31)) < 1e-15


def test_cell_nodes_shape_and_weights():
    nodes, weights = cell_nodes(np.array([0.0, 1.0]), np.array([1.0, 3.0]))
    assert nodes.shape == (2, 16)
    np.testing.assert_allclose(weights.sum(axis=-1), [1.0, 2.0], rtol=1e-14)


def test_composite_integrates_smooth_function():
    val = composite(np.cos, np.linspace(0.0, 1.0, 5))
    assert abs(val - math.sin(1.0)) < 1e-15


def test_geometric_offsets_reach_inner_scale():
    off = geometric_offsets(1.0, 1e-6)
    assert off[0] == 1.0
    assert 1e-6 <= off.min() < 2e-6
    assert np.all(np.diff(off) < 0)


def test_graded_breaks_cluster_at_focus():
    br = graded_breaks(0.0, 1.0, [0.3], min_scale=1e-10)
    assert br[0] == 0.0 and br[-1] == 1.0
    assert np.all(np.diff(br) > 0)
    assert np.min(np.abs(br - 0.3)) == 0.0
    assert np.sort(np.abs(br - 0.3))[1] <= 1e-9


def test_adaptive_log_singularity_matches_scipy():
    f = lambda t: np.log(np.abs(t - 0.3))  # noqa: E731
    br = graded_breaks(0.0, 1.0, [0.3], min_scale=1e-14)
    val, err = adaptive(f, br, tol=1e-12)
    ref, _ = integrate.quad(lambda t: math.log(abs(t - 0.3)), 0.0, 1.0, points=[0.3],
                            epsabs=1e-14, epsrel=1e-14, limit=200)
    assert abs(val - ref) < 1e-10
    assert err < 1e-10


def test_adaptive_cells_oscillatory():
    a = np.linspace(0.0, 9.0, 10)
    val, _ = adaptive_cells(lambda t: np.sin(40.0 * t), a, a + 1.0, tol=1e-12)
    assert abs(val - (1.0 - math.cos(400.0)) / 40.0) < 1e-11


def test_truncation_limit_geometric_series():
    inc = 0.5 ** np.arange(60)
    lim = truncation_limit(inc)
    assert lim.converged
    assert abs(lim.value - 2.0) < 1e-11


def test_truncation_limit_flags_harmonic_divergence():
    inc = 1.0 / np.arange(1, 41)
    assert not truncation_limit(inc).converged


def test_truncation_limit_nonfinite():
    lim = truncation_limit([1.0, np.nan, 0.1])
    assert not lim.converged and math.isnan(lim.value)


@pytest.mark.parametrize("c", [0.1, 1.0, 2.5])
def test_adaptive_shell_sum_of_log_integral(c):
    # int_0^c log t dt = c log c - c via dyadic shells
    hi = c * 2.0 ** -np.arange(60, dtype=float)
    nodes, weights = cell_nodes(0.5 * hi, hi)
    inc = np.sum(weights * np.log(nodes), axis=-1)
    lim = truncation_limit(inc, rtol=1e-15)
    assert lim.converged
    assert abs(lim.value - (c * math.log(c) - c)) < 1e-12


def test_resolvable_levels():
    from outerlip.quadrature import CAUCHY_WINDOW, resolvable_levels
    assert resolvable_levels(1.0, 4.0 ** -10, 24) == 10
    assert resolvable_levels(1.0, 1e-300, 24) == 24
    assert resolvable_levels(1.0, 5e-324, 24) == 24
    assert resolvable_levels(1e-20, 1e-10, 24) == CAUCHY_WINDOW + 2
