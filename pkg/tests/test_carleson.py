from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from outerlip.boundary import TWO_PI, chord, log_integral, psi_seminorm
from outerlip.carleson import (CarlesonSet, arc_log_integral, build_hE, carleson_sum,
                               depth_sweep, derivative_bounds, make_cantor,
                               make_noncarleson, noncarleson_gap, pm1)
from outerlip.errors import ConfigError, DomainError
from outerlip.modulus import Modulus

HALF = Modulus.power(0.5)


def test_pm1_structure():
    E = pm1()
    assert E.size == 2
    np.testing.assert_allclose(E.points, [0.0, math.pi])
    np.testing.assert_allclose(E.chords, [2.0, 2.0])


def test_pm1_carleson_sum_closed_form():
    # two arcs of chord 2: 2 * 2 * log(sqrt 2)
    s = carleson_sum(pm1(), HALF)
    assert abs(s.value - 2.0 * math.log(2.0)) < 1e-14
    assert s.trend == "finite" and not s.divergent


def test_from_points_and_arcs_agree():
    E1 = CarlesonSet.from_points([0.0, 1.0, 3.0])
    E2 = CarlesonSet.from_arcs([0.0, 1.0, 3.0], [1.0, 3.0, TWO_PI])
    np.testing.assert_allclose(E1.a, E2.a)
    np.testing.assert_allclose(E1.b, E2.b)


def test_overlapping_arcs_rejected():
    with pytest.raises(DomainError):
        CarlesonSet.from_arcs([0.0, 0.5], [1.0, 2.0])


def test_csv_round_trip(tmp_path):
    E = make_cantor(1.0 / 3.0, 3)
    p = tmp_path / "arcs.csv"
    E.to_csv(p)
    F = CarlesonSet.from_csv(p)
    np.testing.assert_allclose(F.a, E.a, rtol=0, atol=1e-15)
    np.testing.assert_allclose(F.b, E.b, rtol=0, atol=1e-15)
    p.write_text("x,y\n0,1\n")
    with pytest.raises(ConfigError):
        CarlesonSet.from_csv(p)


@pytest.mark.parametrize("depth", [1, 3, 6])
def test_cantor_counts_and_measure(depth):
    ratio = 0.3
    E = make_cantor(ratio, depth)
    for n in range(1, depth + 1):
        assert np.sum(E.level == n) == 2 ** (n - 1)
    # the arcs (removed gaps plus surviving intervals) tile the circle
    assert abs(np.sum(E.b - E.a) - TWO_PI) < 1e-12
    assert abs(E.residual_measure - TWO_PI * (2 * ratio) ** depth) < 1e-12


def test_cantor_domain():
    with pytest.raises(DomainError):
        make_cantor(0.5, 3)
    with pytest.raises(DomainError):
        make_cantor(0.3, 0)


def test_noncarleson_gaps_exhaust_the_circle():
    # the tail beyond level N removes about (6 * 2 pi / pi**2) / N
    total = sum(2 ** (n - 1) * noncarleson_gap(n) for n in range(1, 1001))
    assert 0.0 < TWO_PI - total < 4e-3
    E = make_noncarleson(6)
    assert abs(np.sum(E.b - E.a) - TWO_PI) < 1e-12


def test_carleson_trend_verdicts():
    assert carleson_sum(make_cantor(1.0 / 3.0, 10), HALF).trend == "converging"
    nc = carleson_sum(make_noncarleson(10), HALF)
    assert nc.trend == "diverging" and nc.divergent
    assert carleson_sum(make_cantor(1.0 / 3.0, 3), HALF).trend == "inconclusive"


def test_level_terms_sum_to_total():
    s = carleson_sum(make_cantor(0.25, 5), HALF)
    assert abs(s.partial_sums[-1] + s.residual_term - s.value) < 1e-12


@given(a=st.floats(0.0, 6.0), width=st.floats(1e-6, 6.28))
def test_arc_log_integral_identity(a, width):
    b = a + width
    assert abs(arc_log_integral(a, b) - 2.0 * (a - b)) < 1e-8


def test_arc_log_integral_against_scipy():
    a, b = 0.4, 2.9
    ref, _ = integrate.quad(lambda t: math.log((b - t) * (t - a) / (b - a) ** 2), a, b,
                            epsabs=1e-13)
    assert abs(arc_log_integral(a, b) - ref) < 1e-10


def test_hE_values_and_zeros():
    h = build_hE(pm1(), HALF)
    assert h(0.0) == 0.0 and h(math.pi) == 0.0
    # at xi = i: omega(2) |i - 1| |i + 1| / 4
    assert abs(h(0.5 * math.pi) - math.sqrt(2.0) * 2.0 / 4.0) < 1e-15
    th = np.linspace(0.0, TWO_PI, 4097)
    assert np.max(h(th)) <= 1.0 + 1e-12


def test_hE_log_integral_closed_form():
    # each half-circle arc contributes mean log(sqrt 2 |xi-1||xi+1| / 4) = log(sqrt 2 / 4)
    li = log_integral(build_hE(pm1(), HALF))
    assert abs(li.value - math.log(math.sqrt(2.0) / 4.0)) < 1e-10


def test_hE_seminorm_bound():
    for E in (pm1(), make_cantor(1.0 / 3.0, 6)):
        assert psi_seminorm(build_hE(E, HALF), HALF).value <= 2.05


@pytest.mark.parametrize("arc", [0, 5, 40])
def test_derivative_bounds_closed_form(arc):
    # on one arc k = 2 omega(l) [cos(theta - m) - cos((b - a)/2)] / l**2, so the
    # normalized sups of |k'| and |k''| are exactly 1 and 2
    d = derivative_bounds(make_cantor(1.0 / 3.0, 6), HALF, arc)
    assert abs(d.first - 1.0) < 1e-4
    assert abs(d.second - 2.0) < 1e-4


def test_derivative_bounds_index_check():
    with pytest.raises(DomainError):
        derivative_bounds(pm1(), HALF, 5)


def test_depth_sweep_rows():
    rows = depth_sweep(lambda d: make_cantor(1.0 / 3.0, d), [2, 4], HALF)
    assert [r.depth for r in rows] == [2, 4]
    assert rows[1].residual_measure < rows[0].residual_measure
    assert set(rows[0].to_json()) == {"depth", "carleson_partial", "carleson_total",
                                      "log_integral", "log_integral_divergent",
                                      "residual_measure"}


def test_chord_of_arcs():
    E = CarlesonSet.from_points([0.0, 1.0])
    np.testing.assert_allclose(E.chords, chord(E.b - E.a))
