from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from outerlip.boundary import TWO_PI, ChordProduct, Tabulated, wrap
from outerlip.errors import DomainError, MarginError
from outerlip.outer import OuterEvaluator


def closed_form(factors, scale, z):
    """scale * prod (1 - z e^{-i theta_k})**beta_k (principal branch)."""
    out = np.full(np.shape(z), scale, dtype=complex)
    for t, b in factors:
        out = out * (1.0 - z * np.exp(-1j * t)) ** b
    return out


def closed_phase(factors, theta):
    return sum(b * (wrap(theta - t) - math.pi) / 2.0 for t, b in factors)


factor_lists = st.lists(st.tuples(st.floats(0.0, 6.28), st.floats(0.2, 2.0)),
                        min_size=1, max_size=3)


@given(factors=factor_lists, scale=st.floats(0.5, 3.0),
       r=st.floats(0.0, 0.999), phi=st.floats(0.0, 6.28))
def test_interior_matches_closed_form(factors, scale, r, phi):
    ev = OuterEvaluator(ChordProduct(factors, scale))
    z = r * complex(math.cos(phi), math.sin(phi))
    ref = complex(closed_form(factors, scale, z))
    assert abs(ev.value(z) - ref) <= 1e-8 * max(1.0, abs(ref))


@given(factors=factor_lists, theta=st.floats(0.0, 6.28))
def test_boundary_phase_matches_closed_form(factors, theta):
    ev = OuterEvaluator(ChordProduct(factors))
    h = ev.h
    if h.zero_distance(theta) < 1e-6:
        return
    assert abs(ev.v_boundary(theta) - closed_phase(factors, theta)) < 1e-9


def test_value_at_origin_is_geometric_mean(chord_ev):
    assert abs(chord_ev.value(0.0) - 1.0) < 1e-11
    assert abs(chord_ev.v(0.0)) < 1e-14


def test_grid_against_one_minus_z(chord_ev, sqrt_ev):
    n = 32
    r = (np.arange(n) + 0.5) / n
    z = (r[:, None] * np.exp(1j * TWO_PI * np.arange(n) / n)[None, :]).ravel()
    assert np.max(np.abs(chord_ev.value(z) - (1 - z))) < 1e-9
    assert np.max(np.abs(sqrt_ev.value(z) ** 2 - (1 - z))) < 1e-9


def test_near_boundary_points(chord_ev):
    z = (1 - 1e-9) * np.exp(1j * np.array([1e-6, 0.5, 3.0]))
    np.testing.assert_allclose(chord_ev.value(z), 1 - z, atol=1e-8)


def test_boundary_phase_tiny_offsets(chord_ev):
    for t in (1e-9, -2e-10, TWO_PI - 1.5e-10):
        assert abs(chord_ev.v_boundary(t) - (wrap(t) - math.pi) / 2) < 1e-9


def test_margin_and_zero_flags(chord_ev):
    out, u, v, flags = chord_ev.evaluate(np.exp(1j * np.array([0.0, 1e-11, 1.0])))
    assert flags.tolist() == ["zero", "margin", "ok"]
    assert out[0] == 0 and np.isnan(out[1])
    with pytest.raises(MarginError):
        chord_ev.value(np.exp(1e-11j))
    with pytest.raises(MarginError):
        chord_ev.v_boundary(1e-11)


def test_rho_power(chord_ev):
    z = 0.3 + 0.4j
    assert abs(chord_ev.value(z, rho=2.0) - (1 - z) ** 2) < 1e-12
    with pytest.raises(DomainError):
        chord_ev.evaluate(z, rho=0.5)


def test_domain_errors(chord_ev):
    with pytest.raises(DomainError):
        chord_ev.uv(1.0)
    with pytest.raises(DomainError):
        chord_ev.evaluate(1.5)


def test_constant_function():
    ev = OuterEvaluator(ChordProduct.constant(3.0))
    z = np.array([0.0, 0.5j, -0.9, 1.0, -1j])
    np.testing.assert_allclose(ev.value(z), 3.0, atol=1e-13)


def test_tabulated_outer_modulus_on_circle():
    # exp(u) tends to h radially; compare at r = 1 - 1e-4 against h at the same angle
    h = Tabulated.from_function(lambda t: 2.0 + np.cos(t), 256)
    ev = OuterEvaluator(h)
    th = np.linspace(0.1, 6.0, 7)
    z = (1 - 1e-4) * np.exp(1j * th)
    np.testing.assert_allclose(np.exp(ev.u(z)), h(th), rtol=2e-3)


def test_plan_log_integral(chord_ev):
    assert abs(chord_ev.plan_log_integral()) < 1e-12


def test_convergence_probe_decreases(chord_ev):
    radii = 1 - 2.0 ** -np.arange(4, 9)
    dev = chord_ev.convergence_probe(math.pi, radii)
    assert np.all(np.diff(dev) < 0)


def test_tabulated_phase_converges_on_table_nodes():
    # angles exactly on interpolation nodes near pi used to stall in rounding noise
    h = Tabulated.from_function(lambda t: np.abs(2 * np.sin(t / 2)), 1024)
    ev = OuterEvaluator(h)
    th = TWO_PI * np.array([480, 500, 512, 530]) / 1024
    res = ev.phases(th)
    assert list(res.flags) == ["ok"] * 4
    # linear interpolation of |xi - 1| stays close to its exact phase (theta - pi) / 2
    np.testing.assert_allclose(res.values, (th - math.pi) / 2, atol=1e-4)
