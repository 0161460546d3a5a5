"""Nonnegative boundary data on the unit circle.

A :class:`BoundaryFunction` knows its values, its logarithm (computed
directly, so it stays accurate next to zeros) and its zero set. The module
also carries the estimators that only need ``h`` itself: the mean of
``log h``, pair-sampled seminorms and the two local regularity constants.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .modulus import Modulus
from .quadrature import (adaptive_cells, cell_nodes, geometric_offsets,
                         truncation_limit)

TWO_PI = 2.0 * math.pi
LOG_FLOOR = 1e-300
ZERO_THRESHOLD = 1e-12


def wrap(theta):
    """Reduce angles to [0, 2*pi)."""
    out = np.mod(theta, TWO_PI)
    return np.where(out >= TWO_PI, 0.0, out)


def chord(delta):
    """|e^{i a} - e^{i b}| for angular difference ``delta = a - b``."""
    return 2.0 * np.abs(np.sin(0.5 * np.asarray(delta, dtype=float)))


def offset(theta, anchor):
    """theta - anchor, with the anchor shifted by a multiple of 2 pi toward theta
    before subtracting, so small offsets keep full relative accuracy."""
    theta = np.asarray(theta, dtype=float)
    k = np.round((anchor - theta) / TWO_PI)
    return theta - (anchor - k * TWO_PI)


def arc_half_width(radius):
    """Angular half-width of the boundary arc {zeta : |zeta - xi| <= radius}."""
    r = np.clip(np.asarray(radius, dtype=float), 0.0, 2.0)
    return 2.0 * np.arcsin(0.5 * r)


class BoundaryFunction:
    """Base class; subclasses implement ``_eval`` and ``_log``.

    Angles reach ``_eval`` and ``_log`` unreduced: reducing -1e-9 to
    2 pi - 1e-9 would destroy the relative accuracy of the distance to a
    zero at angle 0, so subclasses reduce only where they need an index.
    """

    kind = "abstract"

    def __init__(self, zeros=()):
        z = np.unique(wrap(np.asarray(zeros, dtype=float)))
        z.setflags(write=False)
        self.zeros = z
        self._cache: dict = {}

    def __call__(self, theta):
        arr = np.asarray(theta, dtype=float)
        out = self._eval(arr)
        return float(out) if np.ndim(out) == 0 else out

    def log(self, theta):
        """log h, floored at log(1e-300) next to zeros."""
        arr = np.asarray(theta, dtype=float)
        out = self._log(arr)
        return float(out) if np.ndim(out) == 0 else out

    def breakpoints(self) -> np.ndarray:
        """Angles where h fails to be smooth (always includes the zeros)."""
        return self.zeros

    def zero_distance(self, theta):
        """Chord distance from e^{i theta} to the zero set (inf if empty)."""
        arr = wrap(np.asarray(theta, dtype=float))
        if self.zeros.size == 0:
            out = np.full(arr.shape, np.inf)
        else:
            z = self.zeros
            idx = np.searchsorted(z, arr)
            left = z[(idx - 1) % z.size]
            right = z[idx % z.size]
            out = np.minimum(chord(arr - left), chord(arr - right))
        return float(out) if np.ndim(out) == 0 else out

    def zero_arcs(self) -> list[tuple[float, float]]:
        """Arcs of positive length on which h vanishes identically."""
        return []

    def describe(self) -> str:
        return self.kind

    def _eval(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _log(self, theta: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(self._eval(theta), LOG_FLOOR))


class ChordProduct(BoundaryFunction):
    """h(e^{i theta}) = scale * prod_k |e^{i theta} - e^{i theta_k}|**beta_k.

    With no factors this is the constant ``scale``.
    """

    kind = "chord_product"

    def __init__(self, factors: Sequence[tuple[float, float]] = (), scale: float = 1.0):
        factors = [(float(t), float(b)) for t, b in factors]
        if scale <= 0 or not math.isfinite(scale):
            raise DomainError("chord product scale must be positive")
        if any(b <= 0 for _, b in factors):
            raise DomainError("chord product exponents must be positive")
        self.factors = tuple(factors)
        self.scale = float(scale)
        self._anchors = np.array([t for t, _ in factors], dtype=float)
        self._betas = np.array([b for _, b in factors], dtype=float)
        super().__init__(self._anchors)

    @classmethod
    def constant(cls, c: float) -> "ChordProduct":
        return cls((), c)

    def _eval(self, theta):
        out = np.full(theta.shape, self.scale)
        for t, b in self.factors:
            out = out * chord(offset(theta, t)) ** b
        return out

    def _log(self, theta):
        out = np.full(theta.shape, math.log(self.scale))
        for t, b in self.factors:
            out = out + b * np.log(np.maximum(chord(offset(theta, t)), LOG_FLOOR))
        return out

    def describe(self) -> str:
        if not self.factors:
            return f"const:{self.scale:g}"
        body = ";".join(f"{t:g},{b:g}" for t, b in self.factors)
        return f"chord:{body}" + ("" if self.scale == 1.0 else f" scale={self.scale:g}")


class CarlesonH(BoundaryFunction):
    """omega(l_n) |xi - a_n| |xi - b_n| / l_n**2 on each arc (a_n, b_n), 0 elsewhere.

    ``arcs`` is any object exposing arrays ``a`` and ``b`` (start angles in
    [0, 2 pi) sorted increasingly, ``b > a``); l_n is the chord of the arc.
    """

    kind = "carleson_hE"

    def __init__(self, arcs, omega: Modulus, label: str | None = None):
        a = np.asarray(arcs.a, dtype=float)
        b = np.asarray(arcs.b, dtype=float)
        if a.size == 0 or np.any(b <= a) or np.any(np.diff(a) <= 0):
            raise DomainError("arcs must be nonempty, sorted and of positive length")
        if np.any(b - a >= TWO_PI):
            raise DomainError("an arc must not cover the whole circle")
        self.arcs = arcs
        self.omega = omega
        self.label = label
        self._a, self._b = a, b
        self._len = chord(b - a)
        self._scale = omega(self._len) / self._len ** 2
        self._logscale = np.log(omega(self._len)) - 2.0 * np.log(self._len)
        super().__init__(np.concatenate([a, wrap(b)]))

    def locate(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Arc index for each angle, the angle unwrapped onto that arc, and an inside mask."""
        theta = wrap(theta)
        idx = np.searchsorted(self._a, theta, side="right") - 1
        th = np.where(idx < 0, theta + TWO_PI, theta)
        idx = np.where(idx < 0, self._a.size - 1, idx)
        inside = (th > self._a[idx]) & (th < self._b[idx])
        return idx, th, inside

    def _eval(self, theta):
        idx, _, inside = self.locate(theta)
        val = (self._scale[idx] * chord(offset(theta, self._a[idx]))
               * chord(offset(theta, self._b[idx])))
        return np.where(inside, val, 0.0)

    def _log(self, theta):
        idx, _, inside = self.locate(theta)
        da = np.maximum(chord(offset(theta, self._a[idx])), LOG_FLOOR)
        db = np.maximum(chord(offset(theta, self._b[idx])), LOG_FLOOR)
        val = self._logscale[idx] + np.log(da) + np.log(db)
        return np.where(inside, val, math.log(LOG_FLOOR))

    def describe(self) -> str:
        return f"hE:{self.label or 'arcs'},{self.omega.name}"


class Tabulated(BoundaryFunction):
    """Samples on a uniform grid over [0, 2 pi), interpolated linearly and periodically."""

    kind = "tabulated"

    def __init__(self, values: Sequence[float], label: str | None = None,
                 zero_threshold: float = ZERO_THRESHOLD):
        h = np.asarray(values, dtype=float)
        if h.ndim != 1 or h.size < 4:
            raise ConfigError("tabulated boundary data needs at least 4 samples")
        if np.any(h < 0) or not np.all(np.isfinite(h)):
            raise ConfigError("tabulated boundary data must be finite and nonnegative")
        n = h.size
        self.n = n
        self.step = TWO_PI / n
        self.grid = self.step * np.arange(n)
        is_zero = h <= zero_threshold * h.max()
        self.values = np.where(is_zero, 0.0, h)
        self.values.setflags(write=False)
        self.label = label
        self._is_zero = is_zero
        super().__init__(self.grid[is_zero])
        self.zero_meta = [(float(self.grid[j]), self._envelope_exponent(j))
                          for j in np.flatnonzero(is_zero)]

    @classmethod
    def from_function(cls, fun: Callable[[np.ndarray], np.ndarray], n: int,
                      label: str | None = None) -> "Tabulated":
        return cls(fun(TWO_PI * np.arange(n) / n), label=label)

    @classmethod
    def from_csv(cls, path: str | Path) -> "Tabulated":
        path = Path(path)
        try:
            with path.open(newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        if not rows or [c.strip() for c in rows[0]] != ["theta", "h"]:
            raise ConfigError(f"{path}: expected header 'theta,h'")
        try:
            data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
        except ValueError as exc:
            raise ConfigError(f"{path}: non-numeric entry ({exc})") from exc
        if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 4:
            raise ConfigError(f"{path}: expected at least 4 rows of two columns")
        n = data.shape[0]
        if not np.allclose(data[:, 0], TWO_PI * np.arange(n) / n, rtol=0, atol=1e-9):
            raise ConfigError(f"{path}: theta must be the uniform grid 2*pi*j/{n}")
        return cls(data[:, 1], label=path.name)

    def _envelope_exponent(self, j: int) -> float:
        """Local exponent of h near the zero sample j from the next samples out."""
        n = self.n
        right = [self.values[(j + k) % n] for k in (1, 2)]
        left = [self.values[(j - k) % n] for k in (1, 2)]
        est = []
        for v1, v2 in (right, left):
            if v1 > 0 and v2 > 0:
                est.append(math.log(v2 / v1) / math.log(2.0))
        return float(np.mean(est)) if est else float("nan")

    def _eval(self, theta):
        j = np.floor(theta / self.step)
        left = theta - j * self.step
        right = (j + 1.0) * self.step - theta
        k = j.astype(np.int64) % self.n
        val = (self.values[k] * right + self.values[(k + 1) % self.n] * left) / self.step
        return np.maximum(val, 0.0)

    def breakpoints(self) -> np.ndarray:
        return self.grid

    def zero_arcs(self) -> list[tuple[float, float]]:
        z = self._is_zero
        nxt = np.roll(z, -1)
        return [(float(self.grid[j]), float(self.grid[j] + self.step))
                for j in np.flatnonzero(z & nxt)]

    def describe(self) -> str:
        return f"tab:{self.label or self.n}"


# ---------------------------------------------------------------------------
# quadrature plan on the circle


def _zero_radii(h: BoundaryFunction, base_width: float) -> np.ndarray:
    """Half-width of the graded neighbourhood of each zero."""
    z = h.zeros
    if z.size == 0:
        return np.zeros(0)
    if z.size == 1:
        gap = np.full(1, TWO_PI)
    else:
        d = np.diff(np.append(z, z[0] + TWO_PI))
        gap = np.minimum(d, np.roll(d, 1))
    radius = np.minimum(base_width, 0.5 * gap)
    kinks = np.setdiff1d(wrap(h.breakpoints()), z)
    if kinks.size:
        kk = np.sort(kinks)
        idx = np.searchsorted(kk, z)
        near = np.minimum(np.abs(kk[(idx - 1) % kk.size] - z) % TWO_PI,
                          np.abs(kk[idx % kk.size] - z) % TWO_PI)
        near = np.minimum(near, TWO_PI - near)
        radius = np.minimum(radius, 0.5 * near)
    return radius


def circle_breaks(h: BoundaryFunction, *, base_cells: int = 64, min_scale: float = 1e-14,
                  ratio: float = 0.5) -> np.ndarray:
    """Breakpoints covering [0, 2 pi], graded geometrically toward each zero of h."""
    width = TWO_PI / base_cells
    pts = [np.linspace(0.0, TWO_PI, base_cells + 1), wrap(h.breakpoints())]
    # grade out to the full base width even past a neighbouring zero, so no
    # cell is wide compared with its distance to the nearest log singularity
    offs = geometric_offsets(width, min_scale, ratio)
    for z0 in h.zeros:
        pts.append(wrap(z0 + offs))
        pts.append(wrap(z0 - offs))
    out = np.unique(np.concatenate(pts + [[0.0, TWO_PI]]))
    return out[(out >= 0.0) & (out <= TWO_PI)]


@dataclass(frozen=True)
class LogIntegral:
    """Mean of log h over the circle."""

    value: float
    divergent: bool
    error: float


def log_integral(h: BoundaryFunction, *, tol: float = 1e-12, base_cells: int = 64,
                 min_scale: float = 1e-14) -> LogIntegral:
    """(1/2 pi) * integral of log h over the circle.

    Away from the zeros the integral is computed adaptively; each zero gets
    a dyadic sequence of shells whose contributions must pass the
    Cauchy-increment test, otherwise the result is flagged divergent.
    """
    if h.zero_arcs():
        return LogIntegral(-math.inf, True, math.inf)
    width = TWO_PI / base_cells
    radii = _zero_radii(h, width)
    pts = [np.linspace(0.0, TWO_PI, base_cells + 1), wrap(h.breakpoints())]
    for z0, rad in zip(h.zeros, radii):
        pts.append(wrap(np.array([z0 - rad, z0 + rad])))
    br = np.unique(np.concatenate(pts + [[0.0, TWO_PI]]))
    a, b = br[:-1], br[1:]
    mid = 0.5 * (a + b)
    if h.zeros.size:
        # drop the cells inside a zero neighbourhood; the shells below cover them
        excluded = np.zeros(a.size, dtype=bool)
        for z0, rad in zip(h.zeros, radii):
            d = np.abs(wrap(mid - z0 + math.pi) - math.pi)
            excluded |= d < rad
        a, b = a[~excluded], b[~excluded]
    body, err = adaptive_cells(h.log, a, b, tol=tol)
    total = body
    divergent = False
    for z0, rad in zip(h.zeros, radii):
        levels = max(int(math.ceil(math.log2(rad / min_scale))), 8)
        hi = rad * 2.0 ** -np.arange(levels, dtype=float)
        lo = hi * 0.5
        nodes, weights = cell_nodes(lo, hi)
        inc = np.sum(weights * (h.log(z0 + nodes) + h.log(z0 - nodes)), axis=-1)
        lim = truncation_limit(inc, rtol=1e-15)
        divergent |= not lim.converged
        total += lim.value
    return LogIntegral(total / TWO_PI, divergent, err / TWO_PI)


# ---------------------------------------------------------------------------
# seminorms


@dataclass(frozen=True)
class PairSpec:
    """Dyadic pair sampling: ``n`` base angles, chords 2, 1, 1/2, ..., 2**-depth,
    and (on the disk) rings of radius 1 - 2**-j for j = 1..radial."""

    n: int = 256
    depth: int = 10
    radial: int = 8

    def refine(self, level: int) -> "PairSpec":
        return PairSpec(self.n * 2 ** level, self.depth + level, self.radial + level)

    def chords(self) -> np.ndarray:
        return 2.0 ** -np.arange(-1, self.depth + 1, dtype=float)

    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    def radii(self) -> np.ndarray:
        return 1.0 - 2.0 ** -np.arange(1, self.radial + 1, dtype=float)

    def describe(self, domain: str) -> str:
        text = f"{domain}: n={self.n}, dyadic chords 2^-k for k=-1..{self.depth}"
        if domain == "closed_disk":
            text += f", rings 1-2^-j for j=1..{self.radial} plus centre, radial pairs"
        return text


@dataclass(frozen=True)
class SeminormEstimate:
    value: float
    witness_pair: tuple[complex, complex] | None
    pair_strategy: str

    def to_json(self) -> dict:
        w = None
        if self.witness_pair is not None:
            w = [[p.real, p.imag] for p in self.witness_pair]
        return {"value": self.value, "witness_pair": w, "pair_strategy": self.pair_strategy}


def circle_pairs(spec: PairSpec) -> tuple[np.ndarray, np.ndarray]:
    """Base and partner points on the circle; partners on both sides."""
    th = spec.angles()
    delta = arc_half_width(spec.chords())
    a = np.repeat(th, 2 * delta.size)
    b = (th[:, None] + np.concatenate([delta, -delta])[None, :]).ravel()
    return np.exp(1j * a), np.exp(1j * b)


def disk_pairs(spec: PairSpec) -> tuple[np.ndarray, np.ndarray]:
    """Circle pairs plus tangential pairs on each ring and all radial pairs."""
    za, zb = [circle_pairs(spec)[0]], [circle_pairs(spec)[1]]
    th = spec.angles()
    chords = spec.chords()
    for r in spec.radii():
        c = chords[chords <= 2.0 * r]
        delta = 2.0 * np.arcsin(0.5 * c / r)
        za.append(r * np.exp(1j * np.repeat(th, 2 * delta.size)))
        zb.append(r * np.exp(1j * (th[:, None] + np.concatenate([delta, -delta])[None, :]).ravel()))
    rings = np.concatenate([[0.0], spec.radii(), [1.0]])
    i, j = np.triu_indices(rings.size, k=1)
    e = np.exp(1j * th)
    za.append((rings[i][None, :] * e[:, None]).ravel())
    zb.append((rings[j][None, :] * e[:, None]).ravel())
    return np.concatenate(za), np.concatenate(zb)


def seminorm(f: Callable[[np.ndarray], np.ndarray], m: Modulus, domain: str = "circle",
             pairs: PairSpec = PairSpec()) -> SeminormEstimate:
    """sup |f(z) - f(w)| / m(|z - w|) over the sampled pair set.

    ``f`` takes an array of complex points (on the circle or in the closed
    disk) and returns real or complex values of the same shape.
    """
    if domain == "circle":
        za, zb = circle_pairs(pairs)
    elif domain == "closed_disk":
        za, zb = disk_pairs(pairs)
    else:
        raise ConfigError(f"unknown seminorm domain {domain!r}")
    pts, inv = np.unique(np.concatenate([za, zb]), return_inverse=True)
    vals = np.asarray(f(pts))
    fa, fb = vals[inv[:za.size]], vals[inv[za.size:]]
    dist = np.minimum(np.abs(za - zb), 2.0)
    good = dist > 0
    ratio = np.zeros(za.size)
    ratio[good] = np.abs(fa[good] - fb[good]) / m(dist[good])
    ratio[~np.isfinite(ratio)] = np.inf
    j = int(np.argmax(ratio))
    value = float(ratio[j])
    witness = (complex(za[j]), complex(zb[j])) if value > 0 else None
    return SeminormEstimate(value, witness, pairs.describe(domain))


def on_circle(g: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """Adapt an angle-valued function to complex points on the circle."""
    return lambda z: g(np.angle(z))


DEFAULT_PSI_PAIRS = PairSpec(n=4096, depth=24, radial=0)


def psi_seminorm(h: BoundaryFunction, psi: Modulus,
                 pairs: PairSpec = DEFAULT_PSI_PAIRS) -> SeminormEstimate:
    """psi_T(h), the psi-seminorm of h on the circle (cached on h)."""
    key = ("psi_T", psi.name, pairs)
    if key not in h._cache:
        h._cache[key] = seminorm(on_circle(h), psi, "circle", pairs)
    return h._cache[key]


PSI_FLOOR = 1e-12


def psi_radius(h: BoundaryFunction, psi: Modulus, theta, psi_t: float | None = None):
    """psi*(h(theta) / (2 psi_T(h))), with psi_T floored and the ratio clipped to [0, 1]."""
    if psi_t is None:
        psi_t = psi_seminorm(h, psi).value
    ratio = np.clip(np.asarray(h(theta)) / (2.0 * max(psi_t, PSI_FLOOR)), 0.0, 1.0)
    return psi.inverse_star(ratio)


# ---------------------------------------------------------------------------
# local regularity constants


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    divergent: bool
    witness: tuple[float, float] | None
    admissible: int

    def to_json(self) -> dict:
        return {"value": self.value, "divergent": self.divergent,
                "witness": list(self.witness) if self.witness else None,
                "admissible": self.admissible}


def _dyadic_cells(smax: np.ndarray, levels: int):
    hi = smax[:, None] * 2.0 ** -np.arange(levels, dtype=float)
    return cell_nodes(0.5 * hi, hi)


def zitona3_constant(h: BoundaryFunction, psi: Modulus, thetas, *, s_depth: int = 20,
                     levels: int = 48, psi_t: float | None = None) -> ConstantEstimate:
    """sup over admissible (theta, s) of
    lim_{eps->0} int_eps^s |h(theta+t) - h(theta-t)| / t dt, divided by psi(s).

    s runs over smax * 2**-j, j = 0..s_depth, where smax(theta) is the psi-arc
    radius at theta; angles on the zero set are skipped.
    """
    th = np.asarray(thetas, dtype=float)
    smax = np.atleast_1d(psi_radius(h, psi, th, psi_t))
    ok = smax > 0
    th, smax = th[ok], smax[ok]
    if th.size == 0:
        return ConstantEstimate(0.0, False, None, 0)
    nodes, weights = _dyadic_cells(smax, levels)
    hp = h(th[:, None, None] + nodes)
    hm = h(th[:, None, None] - nodes)
    inc = np.sum(weights * np.abs(hp - hm) / nodes, axis=-1)
    best, witness, divergent = 0.0, None, False
    s = smax[:, None] * 2.0 ** -np.arange(s_depth + 1, dtype=float)
    psis = psi(s)
    for i in range(th.size):
        lim = truncation_limit(inc[i])
        divergent |= not lim.converged
        below = lim.value - np.concatenate([[0.0], np.cumsum(inc[i, :s_depth])])
        ratio = np.maximum(below, 0.0) / psis[i]
        j = int(np.argmax(ratio))
        if ratio[j] > best:
            best, witness = float(ratio[j]), (float(th[i]), float(s[i, j]))
    return ConstantEstimate(best, divergent, witness, int(th.size))


def zitona4_constant(h: BoundaryFunction, psi: Modulus, thetas, *, s_depth: int = 20,
                     psi_t: float | None = None) -> ConstantEstimate:
    """sup over admissible (theta, s) of
    (1/h(theta)) int_s^smax |h(theta+t) h(theta-t) - h(theta)^2| / t^2 dt,
    divided by psi(s)/s."""
    th = np.asarray(thetas, dtype=float)
    smax = np.atleast_1d(psi_radius(h, psi, th, psi_t))
    ok = smax > 0
    th, smax = th[ok], smax[ok]
    if th.size == 0:
        return ConstantEstimate(0.0, False, None, 0)
    nodes, weights = _dyadic_cells(smax, s_depth)
    h0 = h(th)
    prod = h(th[:, None, None] + nodes) * h(th[:, None, None] - nodes)
    inc = np.sum(weights * np.abs(prod - h0[:, None, None] ** 2) / nodes ** 2, axis=-1)
    above = np.concatenate([np.zeros((th.size, 1)), np.cumsum(inc, axis=1)], axis=1)
    s = smax[:, None] * 2.0 ** -np.arange(s_depth + 1, dtype=float)
    ratio = above / h0[:, None] / (psi(s) / s)
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    best = float(ratio[i, j])
    witness = (float(th[i]), float(s[i, j])) if best > 0 else None
    return ConstantEstimate(best, False, witness, int(th.size))
