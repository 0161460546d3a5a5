"""Closed subsets of the circle given by their complementary arcs.

A :class:`CarlesonSet` stores the open arcs (a_n, b_n) whose union is the
complement of E. Generators cover finite point sets and Cantor-type sets
built level by level; at finite depth a Cantor set is replaced by the finite
set of interval endpoints, and the surviving intervals become additional
complementary arcs whose total length is reported as ``residual_measure``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .boundary import TWO_PI, CarlesonH, chord, log_integral, wrap
from .errors import ConfigError, DomainError
from .modulus import Modulus
from .quadrature import adaptive, graded_breaks

DIFF_DIVISIONS = 2048


@dataclass(frozen=True, eq=False)
class CarlesonSet:
    """Complementary arcs of a closed set E, sorted by start angle.

    ``a`` lies in [0, 2 pi) and ``b > a`` (the last arc may pass 2 pi).
    ``level`` is the construction level of each arc (0 for surviving
    intervals of a finite-depth generator and for finite sets).
    """

    a: np.ndarray
    b: np.ndarray
    level: np.ndarray
    generator: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        level = np.asarray(self.level, dtype=int)
        if a.ndim != 1 or a.shape != b.shape or a.shape != level.shape or a.size < 2:
            raise DomainError("a Carleson set needs at least two complementary arcs")
        order = np.argsort(a)
        a, b, level = a[order], b[order], level[order]
        if np.any(a < 0) or np.any(a >= TWO_PI) or np.any(b <= a):
            raise DomainError("arcs need 0 <= a < 2 pi and b > a")
        if np.any(b[:-1] > a[1:] + 1e-12) or b[-1] > a[0] + TWO_PI + 1e-12:
            raise DomainError("complementary arcs overlap")
        for name, arr in (("a", a), ("b", b), ("level", level)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.a.size

    @property
    def lengths(self) -> np.ndarray:
        """Angular lengths b_n - a_n."""
        return self.b - self.a

    @property
    def chords(self) -> np.ndarray:
        """|e^{i b_n} - e^{i a_n}|, the length used in every formula."""
        return chord(self.lengths)

    @property
    def points(self) -> np.ndarray:
        """The arc endpoints, which are the points of E at finite depth."""
        return np.unique(wrap(np.concatenate([self.a, self.b])))

    @property
    def residual_measure(self) -> float:
        """Angular measure of the level-0 arcs, i.e. what the generator has not yet removed."""
        if self.generator.get("kind") in ("cantor", "schedule"):
            return float(np.sum(self.lengths[self.level == 0]))
        return float(TWO_PI - np.sum(self.lengths))

    @property
    def depth(self) -> int:
        return int(self.level.max())

    def describe(self) -> str:
        g = self.generator
        kind = g.get("kind", "explicit")
        if kind == "finite":
            return f"finite({len(g.get('points', []))} points)"
        if kind == "cantor":
            return f"cantor(ratio={g['ratio']:g}, depth={g['depth']})"
        if kind == "schedule":
            return f"schedule({g.get('name', 'gaps')}, depth={g['depth']})"
        return "explicit"

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_points(cls, points: Sequence[float]) -> "CarlesonSet":
        p = np.unique(wrap(np.asarray(points, dtype=float)))
        if p.size < 2:
            raise DomainError("a finite set needs at least two points")
        b = np.append(p[1:], p[0] + TWO_PI)
        return cls(p, b, np.zeros(p.size, dtype=int),
                   {"kind": "finite", "points": [float(x) for x in p]})

    @classmethod
    def from_arcs(cls, a, b) -> "CarlesonSet":
        a = np.asarray(a, dtype=float)
        return cls(a, np.asarray(b, dtype=float), np.zeros(a.size, dtype=int),
                   {"kind": "explicit"})

    @classmethod
    def from_csv(cls, path: str | Path) -> "CarlesonSet":
        path = Path(path)
        try:
            with path.open(newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        if not rows or [c.strip() for c in rows[0]] != ["a_angle", "b_angle"]:
            raise ConfigError(f"{path}: expected header 'a_angle,b_angle'")
        try:
            data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
        except ValueError as exc:
            raise ConfigError(f"{path}: non-numeric entry ({exc})") from exc
        if data.ndim != 2 or data.shape[1] != 2:
            raise ConfigError(f"{path}: expected two columns")
        return cls.from_arcs(data[:, 0], data[:, 1])

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a_angle", "b_angle"])
            for a, b in zip(self.a, self.b):
                w.writerow([repr(float(a)), repr(float(b))])


# ---------------------------------------------------------------------------
# generators


def _from_levels(gaps: list[tuple[float, float, int]], rest: list[tuple[float, float]],
                 generator: dict) -> CarlesonSet:
    arcs = [(lo, hi, lev) for lo, hi, lev in gaps] + [(lo, hi, 0) for lo, hi in rest]
    arcs.sort()
    a = np.array([x[0] for x in arcs])
    b = np.array([x[1] for x in arcs])
    level = np.array([x[2] for x in arcs], dtype=int)
    return CarlesonSet(a, b, level, generator)


def _remove_middles(gap_of, depth: int, total: float):
    """Split every interval by removing a centred gap; ``gap_of(level, width)``."""
    intervals = [(0.0, total)]
    gaps = []
    for n in range(1, depth + 1):
        nxt = []
        for lo, hi in intervals:
            g = gap_of(n, hi - lo)
            if not 0 < g < hi - lo:
                raise DomainError(f"gap at level {n} does not fit its interval")
            mid = 0.5 * (lo + hi)
            gaps.append((mid - 0.5 * g, mid + 0.5 * g, n))
            nxt += [(lo, mid - 0.5 * g), (mid + 0.5 * g, hi)]
        intervals = nxt
    return gaps, intervals


def _close(gaps, rest, total: float):
    """With total < 2 pi, the arc from ``total`` back to 0 joins the complement."""
    if total < TWO_PI - 1e-15:
        gaps = gaps + [(total, TWO_PI, 1)]
    return gaps, rest


def make_cantor(ratio: float, depth: int, total: float = TWO_PI) -> CarlesonSet:
    """Cantor set on [0, total]: each interval keeps two end pieces of relative
    length ``ratio`` and loses its middle part of relative length 1 - 2 ratio.

    Level n contributes 2**(n-1) removed arcs, 2**depth - 1 in all.
    """
    if not 0 < ratio < 0.5:
        raise DomainError("cantor ratio must lie in (0, 1/2)")
    if depth < 1:
        raise DomainError("cantor depth must be >= 1")
    if not 0 < total <= TWO_PI:
        raise DomainError("total angle must lie in (0, 2 pi]")
    gaps, rest = _remove_middles(lambda n, w: (1.0 - 2.0 * ratio) * w, depth, total)
    gaps, rest = _close(gaps, rest, total)
    return _from_levels(gaps, rest, {"kind": "cantor", "ratio": float(ratio),
                                     "depth": int(depth), "total": float(total)})


def noncarleson_gap(n: int, total: float = TWO_PI) -> float:
    """Gap length at level n of the non-Carleson schedule.

    Each of the 2**(n-1) gaps at level n has length K / (2**(n-1) n**2) with
    K = 6 total / pi**2, so the removed length sums to ``total`` and the
    surviving intervals shrink to points.
    """
    k = 6.0 * total / math.pi ** 2
    return k / (2.0 ** (n - 1) * n * n)


def make_noncarleson(depth: int, total: float = TWO_PI) -> CarlesonSet:
    """Cantor-type set whose Carleson sum diverges for every power modulus.

    Level n removes 2**(n-1) arcs of length ~ 1/(2**n n**2), so the level-n
    terms behave like -alpha log 2 / n for omega = t**alpha.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    gaps, rest = _remove_middles(lambda n, w: noncarleson_gap(n, total), depth, total)
    gaps, rest = _close(gaps, rest, total)
    return _from_levels(gaps, rest, {"kind": "schedule", "name": "noncarleson",
                                     "depth": int(depth), "total": float(total)})


def pm1() -> CarlesonSet:
    """E = {1, -1}."""
    return CarlesonSet.from_points([0.0, math.pi])


# ---------------------------------------------------------------------------
# Carleson sum


@dataclass(frozen=True)
class CarlesonSum:
    """Sum of chord * log omega(chord) over the complementary arcs.

    ``level_terms[n-1]`` is the contribution of the arcs removed at level n;
    ``residual_term`` is that of the surviving intervals. ``trend`` is
    "finite" for finite sets, otherwise "converging", "diverging" or
    "inconclusive" from the decay of the level terms.
    """

    value: float
    level_terms: np.ndarray
    partial_sums: np.ndarray
    residual_term: float
    trend: str
    decay_exponent: float | None

    @property
    def divergent(self) -> bool:
        return self.trend == "diverging"

    def to_json(self) -> dict:
        return {"value": self.value, "divergent": self.divergent, "trend": self.trend,
                "level_terms": [float(x) for x in self.level_terms],
                "partial_sums": [float(x) for x in self.partial_sums],
                "residual_term": self.residual_term,
                "decay_exponent": self.decay_exponent}


HARMONIC_EXPONENT = 1.25


def _local_exponents(terms: np.ndarray) -> np.ndarray:
    """p_n with |t_{n+1}| / |t_n| = (n / (n + 1))**p_n."""
    t = np.abs(terms)
    n = np.arange(1, t.size, dtype=float)
    return -np.log(t[1:] / t[:-1]) / np.log((n + 1) / n)


def _decay_trend(terms: np.ndarray, window: int = 4) -> tuple[str, float | None]:
    """Classify the tail of the level terms.

    Geometric tails (ratios below 1/1.1, or local power exponents growing
    steadily) converge. A stable local exponent p gives a power-law tail,
    read as diverging when p <= HARMONIC_EXPONENT: at reachable depths a
    log-corrected harmonic tail shows p slightly above 1.
    """
    if terms.size < window + 1:
        return "inconclusive", None
    tail = terms[-window - 1:]
    if np.any(tail == 0) or not (np.all(tail > 0) or np.all(tail < 0)):
        return "inconclusive", None
    q = np.abs(tail[1:] / tail[:-1])
    if np.all(q <= 1.0 / 1.1) and np.all(np.diff(q) <= 0):
        return "converging", None
    p = _local_exponents(terms)[-window:]
    last = float(p[-1])
    if np.all(np.diff(p) > 0) and p[0] > 0 and last >= 1.5 * p[0] and last > 2.0:
        return "converging", last
    if np.ptp(p) <= 0.2 * abs(last):
        return ("diverging" if last <= HARMONIC_EXPONENT else "converging"), last
    return "inconclusive", last


def carleson_sum(E: CarlesonSet, omega: Modulus) -> CarlesonSum:
    ell = E.chords
    terms = ell * np.log(omega(ell))
    total = float(np.sum(terms))
    depth = E.depth
    if E.generator.get("kind") not in ("cantor", "schedule") or depth == 0:
        return CarlesonSum(total, np.array([total]), np.array([total]), 0.0, "finite", None)
    # the closing arc of a partial-circle construction is booked at level 1
    level_terms = np.array([float(np.sum(terms[E.level == n])) for n in range(1, depth + 1)])
    residual = float(np.sum(terms[E.level == 0]))
    trend, p = _decay_trend(level_terms)
    return CarlesonSum(total, level_terms, np.cumsum(level_terms), residual, trend, p)


def build_hE(E: CarlesonSet, omega: Modulus) -> CarlesonH:
    """omega(l_n) |xi - a_n| |xi - b_n| / l_n**2 on each arc, 0 on E."""
    return CarlesonH(E, omega, label=E.describe())


@dataclass(frozen=True)
class DepthRow:
    depth: int
    carleson_partial: float
    carleson_total: float
    log_integral: float
    log_integral_divergent: bool
    residual_measure: float

    def to_json(self) -> dict:
        return {"depth": self.depth, "carleson_partial": self.carleson_partial,
                "carleson_total": self.carleson_total, "log_integral": self.log_integral,
                "log_integral_divergent": self.log_integral_divergent,
                "residual_measure": self.residual_measure}


def depth_sweep(make, depths: Sequence[int], omega: Modulus) -> list[DepthRow]:
    """Carleson sum and mean of log h_E for the sets ``make(d)``, one row per depth."""
    rows = []
    for d in depths:
        E = make(int(d))
        s = carleson_sum(E, omega)
        li = log_integral(build_hE(E, omega))
        rows.append(DepthRow(int(d), float(s.partial_sums[-1]), s.value, li.value,
                             li.divergent, E.residual_measure))
    return rows


# ---------------------------------------------------------------------------
# per-arc checks


def arc_log_integral(a: float, b: float, tol: float = 1e-13) -> float:
    """int_a^b log((b - t)(t - a) / (b - a)**2) dt by graded quadrature.

    The integrand is written in the offset s = t - a, which keeps the
    endpoint singularity at full relative accuracy; the exact value is 2 (a - b).
    """
    width = float(b - a)
    if width <= 0:
        raise DomainError("need b > a")

    def f(s):
        return np.log(s / width) + np.log1p(-s / width)

    # symmetric about the midpoint; only the singularity at s = 0 remains
    half = 0.5 * width
    breaks = graded_breaks(0.0, half, [0.0], min_scale=1e-15 * width)
    value, _ = adaptive(f, breaks, tol=0.5 * tol * width)
    return 2.0 * value


@dataclass(frozen=True)
class DerivativeBounds:
    """sup |k'| l / omega(l) and sup |k''| l**2 / omega(l) on one arc."""

    first: float
    second: float
    arc_index: int
    step: float

    def to_json(self) -> dict:
        return {"arc_index": self.arc_index, "first": self.first,
                "second": self.second, "step": self.step}


def _richardson(d_h, d_2h):
    return (4.0 * d_h - d_2h) / 3.0


def derivative_bounds(E: CarlesonSet, omega: Modulus, arc_index: int,
                      divisions: int = DIFF_DIVISIONS) -> DerivativeBounds:
    """Finite-difference derivative sups of k(theta) = h_E(e^{i theta}) on one arc.

    Central differences with step (b - a)/divisions are Richardson-combined
    with those at twice the step; the two cells at each end use one-sided
    second-order stencils.
    """
    if not 0 <= arc_index < E.size:
        raise DomainError(f"arc index {arc_index} out of range")
    h = build_hE(E, omega)
    a, b = float(E.a[arc_index]), float(E.b[arc_index])
    s = (b - a) / divisions
    j = np.arange(divisions + 1)

    def k(idx):
        # evaluate at offsets a + idx*s, clipped to the closed arc
        th = a + np.clip(idx, 0, divisions) * s
        return np.atleast_1d(h(th))

    inner = j[2:-2]
    d1 = _richardson((k(inner + 1) - k(inner - 1)) / (2 * s),
                     (k(inner + 2) - k(inner - 2)) / (4 * s))
    d2 = _richardson((k(inner + 1) - 2 * k(inner) + k(inner - 1)) / s ** 2,
                     (k(inner + 2) - 2 * k(inner) + k(inner - 2)) / (4 * s * s))
    left = np.array([0, 1])
    right = np.array([divisions - 1, divisions])
    e1 = np.concatenate([(-3 * k(left) + 4 * k(left + 1) - k(left + 2)) / (2 * s),
                         (3 * k(right) - 4 * k(right - 1) + k(right - 2)) / (2 * s)])
    e2 = np.concatenate([(2 * k(left) - 5 * k(left + 1) + 4 * k(left + 2) - k(left + 3)) / s ** 2,
                         (2 * k(right) - 5 * k(right - 1) + 4 * k(right - 2) - k(right - 3)) / s ** 2])
    ell = float(chord(b - a))
    w = float(omega(ell))
    first = float(np.max(np.abs(np.concatenate([d1, e1])))) * ell / w
    second = float(np.max(np.abs(np.concatenate([d2, e2])))) * ell ** 2 / w
    return DerivativeBounds(first, second, int(arc_index), s)


def derivative_sweep(E: CarlesonSet, omega: Modulus,
                     divisions: int = DIFF_DIVISIONS) -> list[DerivativeBounds]:
    return [derivative_bounds(E, omega, i, divisions) for i in range(E.size)]
