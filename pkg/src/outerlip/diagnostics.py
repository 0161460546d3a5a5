"""Membership diagnostics for O_h^rho in the Lipschitz algebra of a modulus.

Every sup over a continuous family is estimated on nested grids; a report
carries the per-level values and is declared finite when the last two
levels agree within 10 percent. Values are finite-grid lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .boundary import (TWO_PI, BoundaryFunction, PairSpec, arc_half_width, chord,
                       circle_pairs, disk_pairs, psi_radius, psi_seminorm, wrap)
from .errors import DomainError
from .modulus import Modulus
from .outer import INTERIOR_LIMIT, OuterEvaluator
from .quadrature import (RESOLUTION_ULPS, adaptive, cell_nodes, graded_breaks,
                         resolvable_levels, truncation_limit)

STABILITY_RATIO = 1.1
D_RADII = 8
D_ANGLES = 16
ARC_SAMPLES = 64
WINDOW_SAMPLES = 65
A_LEVELS = 40


@dataclass(frozen=True)
class GridSpec:
    """Nested sampling levels: level l uses n0 * 2**l base angles, pair depth
    depth0 + l and radial0 + l rings."""

    n0: int = 64
    depth0: int = 8
    radial0: int = 6
    levels: int = 3

    def pairs(self, level: int) -> PairSpec:
        return PairSpec(self.n0 * 2 ** level, self.depth0 + level, self.radial0 + level)

    def angles(self, level: int) -> np.ndarray:
        n = self.n0 * 2 ** level
        return TWO_PI * np.arange(n) / n

    def to_json(self) -> dict:
        return {"n0": self.n0, "depth0": self.depth0, "radial0": self.radial0,
                "levels": self.levels}


@dataclass
class ConditionReport:
    condition_id: str
    value: float | None
    divergent: bool
    witness: object
    params: dict
    grid_levels: list = field(default_factory=list)
    stability_ratio: float | None = None

    def to_json(self) -> dict:
        return {"condition_id": self.condition_id, "value": self.value,
                "divergent": self.divergent, "witness": self.witness,
                "params": self.params, "grid_levels": self.grid_levels,
                "stability_ratio": self.stability_ratio}


def stability_ratio(values: Sequence[float]) -> float:
    """Last level over the one before (1 when both vanish)."""
    if len(values) < 2:
        return 1.0
    last, prev = float(values[-1]), float(values[-2])
    if not (math.isfinite(last) and math.isfinite(prev)):
        return math.inf
    if prev == 0.0:
        return 1.0 if last == 0.0 else math.inf
    return last / prev


def _report(cid: str, levels: list[tuple[float, object]], params: dict,
            failed: bool = False) -> ConditionReport:
    values = [float(v) for v, _ in levels]
    ratio = stability_ratio(values)
    divergent = failed or not math.isfinite(values[-1]) or ratio > STABILITY_RATIO
    return ConditionReport(cid, None if divergent else values[-1], bool(divergent),
                           levels[-1][1], params, values,
                           ratio if math.isfinite(ratio) else None)


class _Memo:
    """Values at points already computed on a coarser level (nested grids reuse them)."""

    def __init__(self, fn: Callable[[np.ndarray], tuple]):
        self.fn = fn
        self.store: dict = {}

    def __call__(self, pts: np.ndarray) -> list[np.ndarray]:
        keys = pts.tolist()
        missing = [k for k in dict.fromkeys(keys) if k not in self.store]
        if missing:
            cols = self.fn(np.array(missing))
            for i, k in enumerate(missing):
                self.store[k] = tuple(c[i] for c in cols)
        rows = [self.store[k] for k in keys]
        return [np.array(col) for col in zip(*rows)] if rows else []


def _pair_witness(za, zb) -> list:
    return [[float(za.real), float(za.imag)], [float(zb.real), float(zb.imag)]]


def _pair_sup(za, zb, fa, fb, omega: Modulus) -> tuple[float, object]:
    """sup |fa - fb| / omega(|za - zb|), skipping pairs with a NaN value."""
    dist = np.minimum(np.abs(za - zb), 2.0)
    good = (dist > 0) & np.isfinite(fa) & np.isfinite(fb)
    if not np.any(good):
        return 0.0, None
    ratio = np.zeros(za.size)
    ratio[good] = np.abs(fa[good] - fb[good]) / omega(dist[good])
    j = int(np.argmax(ratio))
    if ratio[j] == 0:
        return 0.0, None
    return float(ratio[j]), _pair_witness(za[j], zb[j])


# ---------------------------------------------------------------------------
# local scales


def psi_arc_radius(h: BoundaryFunction, psi: Modulus, xi, psi_t: float | None = None):
    """psi*(h(xi) / (2 psi_T(h))), the radius of the arc Psi_xi (0 on the zero set)."""
    return psi_radius(h, psi, xi, psi_t)


def lambda_point(h: BoundaryFunction, psi: Modulus, xi, psi_t: float | None = None):
    """lambda_h(xi): half the Psi_xi radius. Kept separate from the arc radius on purpose."""
    return 0.5 * psi_arc_radius(h, psi, xi, psi_t)


def _psi_t(h: BoundaryFunction, psi: Modulus, psi_t: float | None) -> float:
    return psi_seminorm(h, psi).value if psi_t is None else float(psi_t)


def a_h(h: BoundaryFunction, psi: Modulus, xi: float, psi_t: float | None = None,
        tol: float = 1e-10) -> float:
    """int over T minus Psi_xi of |log(h(zeta)/h(xi))| / |zeta - xi|**2 |d zeta|."""
    xi = float(xi)
    h0 = float(h(xi))
    if h0 <= 0:
        raise DomainError("a_h needs h(xi) > 0")
    w = float(arc_half_width(psi_arc_radius(h, psi, xi, _psi_t(h, psi, psi_t))))
    if w >= math.pi:
        return 0.0
    log0 = math.log(h0)
    lo, hi = w, TWO_PI - w

    def f(t):
        return np.abs(h.log(xi + t) - log0) / chord(t) ** 2

    zeros = wrap(h.zeros - xi)
    kinks = wrap(np.setdiff1d(wrap(h.breakpoints()), h.zeros) - xi)
    # log singularities need deep grading; the kernel near the Psi_xi ends
    # only varies on the scale w
    inside = zeros[(zeros > lo) & (zeros < hi)]
    deep = graded_breaks(lo, hi, inside, min_scale=1e-14 * min(1.0, w * w),
                         extra=kinks[(kinks > lo) & (kinks < hi)], base_cells=32)
    ends = graded_breaks(lo, hi, [lo, hi], min_scale=w / 16.0, base_cells=1)
    breaks = np.union1d(deep, ends)
    value, _ = adaptive(f, breaks, tol=tol * (1.0 + 1.0 / w))
    return float(value)


def mu(h: BoundaryFunction, psi: Modulus, theta: float, phi: float,
       psi_t: float | None = None, samples: int = 33) -> float:
    """inf over sampled points sigma of the arc [theta, phi] of 1 / a_h(sigma)."""
    lo, hi = sorted((float(wrap(theta)), float(wrap(phi))))
    s = np.linspace(lo, hi, samples)
    if np.any(np.atleast_1d(h(s)) <= 0):
        return 0.0
    vals = [a_h(h, psi, x, psi_t) for x in s]
    top = max(vals)
    return math.inf if top == 0 else 1.0 / top


def default_delta(c2: float, psi_t: float, rho: float) -> float:
    """min{1 / max(2, 2 C2), 1 / (4 psi_T)**rho}."""
    first = 1.0 / max(2.0, 2.0 * c2)
    second = math.inf if psi_t <= 0 else 1.0 / (4.0 * psi_t) ** rho
    return min(first, second)


# ---------------------------------------------------------------------------
# membership conditions


def _params(**kw) -> dict:
    return {k: v for k, v in kw.items() if v is not None}


def condition1_seminorm(ev: OuterEvaluator, rho: float, omega: Modulus,
                        grid: GridSpec = GridSpec()) -> ConditionReport:
    """omega-seminorm of the boundary values of O_h^rho over circle pairs (0 on E_h)."""
    levels, failed, skipped = [], False, 0

    def boundary_values(p):
        out, _, _, flags = ev.evaluate(p, rho)
        return out, flags

    memo = _Memo(boundary_values)
    for lvl in range(grid.levels):
        za, zb = circle_pairs(grid.pairs(lvl))
        pts, inv = np.unique(np.concatenate([za, zb]), return_inverse=True)
        out, flags = memo(pts)
        failed |= bool(np.any(flags == "divergent"))
        skipped = int(np.sum(flags == "margin"))
        vals = out.astype(complex)
        fa, fb = vals[inv[:za.size]], vals[inv[za.size:]]
        levels.append(_pair_sup(za, zb, fa, fb, omega))
    return _report("C1_seminorm", levels,
                   _params(rho=rho, omega=omega.name, grid=grid.to_json(),
                           margin_points=skipped), failed)


def modulus_power(ev: OuterEvaluator, z: np.ndarray, rho: float) -> np.ndarray:
    """|O_h(z)|**rho on the closed disk: exp(rho u_h) inside, h**rho on the circle."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.size)
    inner = np.abs(z) <= INTERIOR_LIMIT
    if np.any(inner):
        out[inner] = np.exp(rho * np.real(ev.uv(z[inner])))
    if np.any(~inner):
        out[~inner] = np.atleast_1d(ev.h(np.angle(z[~inner]))) ** rho
    return out


def condition2_seminorm(ev: OuterEvaluator, rho: float, omega: Modulus,
                        grid: GridSpec = GridSpec()) -> ConditionReport:
    """omega-seminorm of |O_h^rho| over closed-disk pairs."""
    levels = []
    memo = _Memo(lambda p: (modulus_power(ev, p, rho),))
    for lvl in range(grid.levels):
        za, zb = disk_pairs(grid.pairs(lvl))
        pts, inv = np.unique(np.concatenate([za, zb]), return_inverse=True)
        vals = memo(pts)[0]
        levels.append(_pair_sup(za, zb, vals[inv[:za.size]], vals[inv[za.size:]], omega))
    return _report("C2_modulus_seminorm", levels,
                   _params(rho=rho, omega=omega.name, grid=grid.to_json()))


def d_xi_points(theta: float, radius: float) -> np.ndarray:
    """Sample of D_xi = {|z - xi| <= radius} in the closed disk.

    D_RADII radii times D_ANGLES inward directions, the boundary arc within
    ``radius`` of xi, and the radial point (1 - radius) xi. Points outside
    the closed disk are dropped.
    """
    xi = complex(math.cos(theta), math.sin(theta))
    s = radius * np.arange(1, D_RADII + 1) / D_RADII
    beta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, D_ANGLES)
    cap = (xi - xi * s[:, None] * np.exp(1j * beta)[None, :]).ravel()
    half = float(arc_half_width(min(radius, 2.0)))
    arc = np.exp(1j * (theta + half * np.linspace(-1.0, 1.0, 2 * D_RADII + 1)))
    radial = np.array([(1.0 - min(radius, 1.0)) * xi])
    pts = np.concatenate([cap, arc, radial])
    return pts[np.abs(pts) <= 1.0]


def _log_modulus(ev: OuterEvaluator, z: np.ndarray) -> np.ndarray:
    """u_h on the closed disk, with u_h = log h on (and within 1e-12 of) the circle."""
    out = np.empty(z.size)
    inner = np.abs(z) <= INTERIOR_LIMIT
    if np.any(inner):
        out[inner] = np.real(ev.uv(z[inner]))
    if np.any(~inner):
        out[~inner] = np.atleast_1d(ev.h.log(np.angle(z[~inner])))
    return out


def condition3_sup(ev: OuterEvaluator, rho: float, omega: Modulus, delta: float,
                   grid: GridSpec = GridSpec()) -> ConditionReport:
    """sup over xi (h(xi) > 0) and z in D_xi of |u_h(z) - log h(xi)|."""
    if delta <= 0:
        raise DomainError("delta must be positive")
    levels = []
    seen: dict[float, tuple[float, complex]] = {}
    for lvl in range(grid.levels):
        th = grid.angles(lvl)
        hv = np.atleast_1d(ev.h(th))
        best, witness = 0.0, None
        for t, hx in zip(th, hv):
            if hx <= 0:
                continue
            if t not in seen:
                radius = float(omega.inverse_star(min(1.0, delta * hx ** rho)))
                if radius <= 0:
                    seen[t] = (0.0, complex(math.cos(t), math.sin(t)))
                else:
                    z = d_xi_points(float(t), radius)
                    dev = np.abs(_log_modulus(ev, z) - math.log(hx))
                    j = int(np.argmax(dev))
                    seen[t] = (float(dev[j]), complex(z[j]))
            dev_t, zt = seen[t]
            if dev_t > best:
                best, witness = dev_t, {"theta": float(t), "z": [zt.real, zt.imag]}
        levels.append((best, witness))
    return _report("C3_log_ratio_sup", levels,
                   _params(rho=rho, omega=omega.name, delta=delta, grid=grid.to_json()))


def condition4_sup(h: BoundaryFunction, psi: Modulus, rho: float, omega: Modulus,
                   grid: GridSpec = GridSpec(), psi_t: float | None = None,
                   condition_id: str = "C4_ah_sup") -> ConditionReport:
    """sup over xi (h(xi) > 0) of h(xi)**rho / omega(min{1, 1/a_h(xi)})."""
    pt = _psi_t(h, psi, psi_t)
    levels = []
    seen: dict[float, float] = {}
    for lvl in range(grid.levels):
        th = grid.angles(lvl)
        hv = np.atleast_1d(h(th))
        best, witness = 0.0, None
        for t, hx in zip(th, hv):
            if hx <= 0:
                continue
            if t not in seen:
                seen[t] = a_h(h, psi, float(t), pt)
            a = seen[t]
            scale = 1.0 if a <= 1.0 else 1.0 / a
            term = float(hx ** rho / omega(scale))
            if term > best:
                best, witness = term, {"theta": float(t), "a_h": a}
        levels.append((best, witness))
    return _report(condition_id, levels,
                   _params(rho=rho, omega=omega.name, psi=psi.name, psi_T=pt,
                           grid=grid.to_json()))


# ---------------------------------------------------------------------------
# arc quantities


def _arc(theta: float, phi: float) -> tuple[float, float]:
    """[xi, zeta] runs from the smaller to the larger angle in [0, 2 pi)."""
    a, b = float(wrap(theta)), float(wrap(phi))
    return (a, b) if a <= b else (b, a)


def arc_inf(h: BoundaryFunction, theta: float, phi: float, samples: int = ARC_SAMPLES,
            rounds: int = 3) -> float:
    """inf of h over the arc [theta, phi], refined around the sampled minimum."""
    lo, hi = _arc(theta, phi)
    z = h.zeros
    if z.size and np.any((z >= lo) & (z <= hi)):
        return 0.0
    s = np.linspace(lo, hi, samples + 1)
    v = np.atleast_1d(h(s))
    best = float(v.min())
    step = (hi - lo) / samples
    for _ in range(rounds):
        j = int(np.argmin(v))
        a, b = max(lo, s[j] - step), min(hi, s[j] + step)
        s = np.linspace(a, b, samples + 1)
        v = np.atleast_1d(h(s))
        best = min(best, float(v.min()))
        step = (b - a) / samples
    return best


def lambda_and_inf(h: BoundaryFunction, psi: Modulus, theta: float, phi: float,
                   psi_t: float | None = None) -> tuple[float, float]:
    """(lambda_h(xi, zeta), h(xi, zeta)); psi* is increasing, so the inf of the
    psi-radius is the radius at the inf of h."""
    if float(wrap(theta)) == float(wrap(phi)):
        raise DomainError("xi and zeta must differ")
    hinf = arc_inf(h, theta, phi)
    if hinf <= 0:
        return 0.0, 0.0
    pt = _psi_t(h, psi, psi_t)
    lam = float(psi.inverse_star(min(1.0, hinf / (2.0 * max(pt, 1e-12)))))
    return lam, hinf


def pv_difference(h: BoundaryFunction, rho: float, theta: float, phi: float,
                  upper: float, levels: int = A_LEVELS) -> tuple[float, bool]:
    """(1/2 pi) lim_eps int_eps^upper rho [L(theta, t) - L(phi, t)] / tan(t/2) dt,
    with L(x, t) = log h(x + t) - log h(x - t). Returns (value, converged)."""
    log_h = h.log

    def g(t):
        d = (log_h(theta + t) - log_h(theta - t)) - (log_h(phi + t) - log_h(phi - t))
        return rho * d / np.tan(0.5 * t)

    offs = []
    for x in (theta, phi):
        k = np.setdiff1d(wrap(h.breakpoints()), h.zeros)
        k = np.concatenate([wrap(k - x), wrap(x - k)])
        offs.append(k[(k > 0) & (k < upper)])
    kinks = np.unique(np.concatenate(offs))
    eps0 = min(0.25 * upper, 0.5 * float(kinks.min())) if kinks.size else 0.25 * upper
    breaks = graded_breaks(eps0, upper, [], extra=kinks, base_cells=8)
    body, _ = adaptive(g, breaks, tol=1e-12)
    floor = RESOLUTION_ULPS * math.ulp(max(abs(theta), abs(phi)))
    hi = eps0 * 4.0 ** -np.arange(resolvable_levels(eps0, floor, levels), dtype=float)
    nodes, weights = cell_nodes(0.25 * hi, hi)
    inc = np.sum(weights * g(nodes), axis=-1)
    lim = truncation_limit(inc, body=body, rtol=1e-13, atol=1e-15)
    return lim.value / TWO_PI, lim.converged


def A_h(h: BoundaryFunction, rho: float, theta: float, phi: float, psi: Modulus,
        psi_t: float | None = None) -> tuple[float, bool]:
    """|sin| of the truncated phase-difference integral up to lambda_h(xi, zeta).

    Returns (value in [0, 1], converged).
    """
    lam, _ = lambda_and_inf(h, psi, theta, phi, psi_t)
    if lam <= 0:
        raise DomainError("A_h needs lambda_h(xi, zeta) > 0")
    val, ok = pv_difference(h, rho, theta, phi, lam)
    return abs(math.sin(val)), ok


def _p12_term(h, psi, rho, omega, ta, tb, dist, pt) -> tuple[float, bool]:
    if wrap(ta) == wrap(tb):
        return 0.0, True
    lam, hinf = lambda_and_inf(h, psi, ta, tb, pt)
    if lam <= 0:
        return 0.0, True
    lo, hi = _arc(ta, tb)
    val, ok = pv_difference(h, rho, lo, hi, lam)
    return hinf ** rho * abs(math.sin(val)) / float(omega(min(dist, 2.0))), ok


def prop_conditions(h: BoundaryFunction, psi: Modulus, rho: float, omega: Modulus,
                    grid: GridSpec = GridSpec(), psi_t: float | None = None,
                    p11: ConditionReport | None = None) -> tuple[ConditionReport, ConditionReport]:
    """(P11, P12). P11 is the C4 sup; P12 is the sup over dyadic circle pairs of
    h(xi, zeta)**rho A_{h^rho}(xi, zeta) / omega(|xi - zeta|)."""
    pt = _psi_t(h, psi, psi_t)
    if p11 is None:
        p11 = condition4_sup(h, psi, rho, omega, grid, pt, condition_id="P11_sup")
    else:
        p11 = ConditionReport("P11_sup", p11.value, p11.divergent, p11.witness,
                              p11.params, p11.grid_levels, p11.stability_ratio)
    levels, failed = [], False
    seen: dict[tuple[complex, complex], tuple[float, bool]] = {}
    for lvl in range(grid.levels):
        za, zb = circle_pairs(grid.pairs(lvl))
        ta, tb = np.angle(za), np.angle(zb)
        best, witness = 0.0, None
        for i in range(za.size):
            key = (complex(za[i]), complex(zb[i]))
            if key not in seen:
                seen[key] = _p12_term(h, psi, rho, omega, float(ta[i]), float(tb[i]),
                                      abs(za[i] - zb[i]), pt)
            term, ok = seen[key]
            failed |= not ok
            if term > best:
                best, witness = term, _pair_witness(za[i], zb[i])
        levels.append((best, witness))
    p12 = _report("P12_Ah_sup", levels,
                  _params(rho=rho, omega=omega.name, psi=psi.name, psi_T=pt,
                          grid=grid.to_json()), failed)
    return p11, p12


def window_max(h: BoundaryFunction, z: complex, samples: int = WINDOW_SAMPLES) -> float:
    """M_z = max of h over {xi in T : |xi - z| <= 2 (1 - |z|)} by sampling."""
    r = abs(z)
    d = 1.0 - r
    phi = math.atan2(z.imag, z.real)
    arg = math.sqrt(3.0) * d / (2.0 * math.sqrt(r)) if r > 0 else math.inf
    if arg >= 1.0:
        th = TWO_PI * np.arange(16 * samples) / (16 * samples)
    else:
        half = 2.0 * math.asin(arg)
        th = phi + half * np.linspace(-1.0, 1.0, samples)
    return float(np.max(np.atleast_1d(h(th))))


def shirokov_criterion(ev: OuterEvaluator, omega: Modulus,
                       grid: GridSpec = GridSpec()) -> ConditionReport:
    """sup over disk points z with M_z >= omega(1 - |z|) of |u_h(z) - log M_z|."""
    levels = []
    for lvl in range(grid.levels):
        spec = grid.pairs(lvl)
        radii = np.concatenate([[0.0], spec.radii()])
        th = spec.angles()
        z = (radii[:, None] * np.exp(1j * th)[None, :]).ravel()
        z = np.unique(z)
        m = np.array([window_max(ev.h, complex(p)) for p in z])
        keep = m >= omega(1.0 - np.abs(z))
        best, witness = 0.0, None
        if np.any(keep):
            u = np.real(ev.uv(z[keep]))
            dev = np.abs(u - np.log(m[keep]))
            j = int(np.argmax(dev))
            best = float(dev[j])
            zk = z[keep][j]
            witness = {"z": [float(zk.real), float(zk.imag)], "M_z": float(m[keep][j])}
        levels.append((best, witness))
    return _report("SHIROKOV_sup", levels, _params(omega=omega.name, grid=grid.to_json()))


@dataclass
class HSCJReport:
    condition4: ConditionReport
    seminorm: ConditionReport
    psi: str
    rho: float

    @property
    def finite(self) -> bool:
        return not (self.condition4.divergent or self.seminorm.divergent)

    def to_json(self) -> dict:
        return {"psi": self.psi, "rho": self.rho, "finite": self.finite,
                "condition4": self.condition4.to_json(),
                "seminorm": self.seminorm.to_json()}


def hscj_check(ev: OuterEvaluator, psi: Modulus, rho: float,
               grid: GridSpec = GridSpec(), psi_t: float | None = None,
               c4: ConditionReport | None = None) -> HSCJReport:
    """C4 with omega = psi, and the psi**(1/rho)-seminorm of O_h on the circle."""
    if c4 is None:
        c4 = condition4_sup(ev.h, psi, rho, psi, grid, psi_t)
    target = psi.pow(1.0 / rho)
    semi = condition1_seminorm(ev, 1.0, target, grid)
    semi.params["modulus"] = target.name
    return HSCJReport(c4, semi, psi.name, rho)


# ---------------------------------------------------------------------------
# bundles


@dataclass
class CheckBundle:
    reports: list[ConditionReport]
    hscj: HSCJReport | None
    context: dict

    def to_json(self) -> dict:
        return {"context": self.context,
                "reports": [r.to_json() for r in self.reports],
                "hscj": self.hscj.to_json() if self.hscj is not None else None}


def run_checks(h: BoundaryFunction, rho: float, omega: Modulus, psi: Modulus | None = None,
               grid: GridSpec = GridSpec(), delta: float | None = None,
               ev: OuterEvaluator | None = None, hscj: bool = True) -> CheckBundle:
    """C1 to C4, P11, P12, the window log-ratio sup and (optionally) the HSCJ check."""
    psi = psi if psi is not None else omega
    ev = ev if ev is not None else OuterEvaluator(h)
    pt = psi_seminorm(h, psi).value
    c1 = condition1_seminorm(ev, rho, omega, grid)
    c2 = condition2_seminorm(ev, rho, omega, grid)
    c2v = c2.value if c2.value is not None else c2.grid_levels[-1]
    d = delta if delta is not None else default_delta(c2v, pt, rho)
    c3 = condition3_sup(ev, rho, omega, d, grid)
    c4 = condition4_sup(h, psi, rho, omega, grid, pt)
    p11, p12 = prop_conditions(h, psi, rho, omega, grid, pt, p11=c4)
    sh = shirokov_criterion(ev, omega, grid)
    hs = None
    if hscj:
        c4_psi = c4 if psi.name == omega.name else None
        hs = hscj_check(ev, psi, rho, grid, pt, c4=c4_psi)
    ctx = {"h": h.describe(), "rho": rho, "omega": omega.name, "psi": psi.name,
           "psi_T": pt, "delta": d, "delta_default": delta is None}
    return CheckBundle([c1, c2, c3, c4, p11, p12, sh], hs, ctx)


@dataclass
class NestedTrend:
    """Per-level values of C2 and C4 when level l also deepens the boundary data."""

    c2: list[float]
    c4: list[float]
    labels: list[str]

    @staticmethod
    def growth(values: Sequence[float]) -> list[float]:
        return [b / a if a > 0 else math.inf for a, b in zip(values[:-1], values[1:])]

    def to_json(self) -> dict:
        return {"labels": self.labels, "C2": self.c2, "C4": self.c4,
                "C2_growth": self.growth(self.c2), "C4_growth": self.growth(self.c4)}


def nested_trend(make_h: Callable[[int], BoundaryFunction], rho: float, omega: Modulus,
                 psi: Modulus | None = None, grid: GridSpec = GridSpec()) -> NestedTrend:
    """C2 and C4 at grid level l for the boundary function make_h(l)."""
    psi = psi if psi is not None else omega
    c2, c4, labels = [], [], []
    for lvl in range(grid.levels):
        h = make_h(lvl)
        single = GridSpec(grid.n0 * 2 ** lvl, grid.depth0 + lvl, grid.radial0 + lvl, 1)
        ev = OuterEvaluator(h)
        c2.append(condition2_seminorm(ev, rho, omega, single).grid_levels[-1])
        c4.append(condition4_sup(h, psi, rho, omega, single).grid_levels[-1])
        labels.append(h.describe())
    return NestedTrend(c2, c4, labels)
