"""Gauss-Legendre building blocks.

Composite rules on graded meshes, a vectorized adaptive refinement loop, and
the truncation-sequence machinery used for integrals whose lower limit is a
limit ``eps -> 0`` (principal values, Dini-type integrals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import AccuracyError

Integrand = Callable[[np.ndarray], np.ndarray]

GAUSS_ORDER = 16
CAUCHY_FACTOR = 1.1
CAUCHY_WINDOW = 4
# shells thinner than this many ulps of the centre angle resolve only rounding noise
RESOLUTION_ULPS = 1024.0


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def cell_nodes(a, b, order: int = GAUSS_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Mapped nodes/weights for cells [a_i, b_i]; shapes (..., order)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return mid[..., None] + half[..., None] * x, half[..., None] * w


def composite(f: Integrand, breaks, order: int = GAUSS_ORDER) -> float:
    breaks = np.asarray(breaks, dtype=float)
    nodes, weights = cell_nodes(breaks[:-1], breaks[1:], order)
    return float(np.sum(weights * f(nodes)))


def geometric_offsets(outer: float, inner: float, ratio: float = 0.5) -> np.ndarray:
    """``outer * ratio**k`` for k = 0, 1, ... while the value stays >= inner."""
    if outer <= inner:
        return np.array([outer])
    n = int(np.floor(np.log(inner / outer) / np.log(ratio))) + 1
    return outer * ratio ** np.arange(n)


def graded_breaks(a: float, b: float, foci, *, min_scale: float = 1e-14,
                  ratio: float = 0.5, base_cells: int = 16, extra=()) -> np.ndarray:
    """Breakpoints on [a, b] geometrically graded toward every focus point.

    Each focus gets points ``focus +- w * ratio**k`` down to ``min_scale``,
    where ``w`` is the uniform cell width capped by half the gap to the nearest
    other focus. Foci and ``extra`` points are themselves breakpoints.
    """
    pts = [np.linspace(a, b, base_cells + 1)]
    foci = np.unique(np.asarray(list(foci), dtype=float))
    foci = foci[(foci >= a) & (foci <= b)]
    width = (b - a) / base_cells
    for i, c in enumerate(foci):
        gap_l = c - foci[i - 1] if i > 0 else np.inf
        gap_r = foci[i + 1] - c if i + 1 < len(foci) else np.inf
        offs_l = geometric_offsets(min(width, 0.5 * gap_l), min_scale, ratio)
        offs_r = geometric_offsets(min(width, 0.5 * gap_r), min_scale, ratio)
        pts.append(c - offs_l)
        pts.append(c + offs_r)
    pts.append(foci)
    extra = np.asarray(list(extra), dtype=float)
    pts.append(extra[(extra >= a) & (extra <= b)])
    out = np.unique(np.concatenate(pts))
    out = out[(out >= a) & (out <= b)]
    return out


def adaptive(f: Integrand, breaks, *, tol: float = 1e-11, rtol: float = 1e-13,
             order: int = GAUSS_ORDER, max_rounds: int = 40,
             max_cells: int = 400_000) -> tuple[float, float]:
    """Adaptive composite Gauss-Legendre starting from ``breaks``.

    Each cell is accepted when the order-``order`` and half-order rules agree
    to within its share ``tol * width / length`` of the absolute tolerance
    (but never less than ``tol`` over four times the initial cell count), or
    to ``rtol`` relative to the cell's own contribution; rejected cells are
    bisected. The loop also ends as soon as the summed estimate is below
    ``tol``. Returns ``(value, error_estimate)``.
    """
    breaks = np.asarray(breaks, dtype=float)
    return adaptive_cells(f, breaks[:-1], breaks[1:], tol=tol, rtol=rtol, order=order,
                          max_rounds=max_rounds, max_cells=max_cells)


def adaptive_cells(f: Integrand, a, b, *, tol: float = 1e-11, rtol: float = 1e-13,
                   order: int = GAUSS_ORDER, max_rounds: int = 40,
                   max_cells: int = 400_000) -> tuple[float, float]:
    """Same as :func:`adaptive` for an explicit, possibly non-contiguous cell list."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    keep = b > a
    a, b = a[keep], b[keep]
    length = float(np.sum(b - a))
    if length <= 0:
        return 0.0, 0.0
    total = 0.0
    err = 0.0
    low = max(order // 2, 2)
    # every cell may use at least a fixed slice of tol, so the many tiny graded
    # cells next to a singularity are not refined for rounding noise
    floor = tol / (4.0 * a.size)
    for _ in range(max_rounds):
        if a.size == 0:
            return total, err
        if a.size > max_cells:
            break
        n_hi, w_hi = cell_nodes(a, b, order)
        n_lo, w_lo = cell_nodes(a, b, low)
        q_hi = np.sum(w_hi * f(n_hi), axis=-1)
        q_lo = np.sum(w_lo * f(n_lo), axis=-1)
        e = np.abs(q_hi - q_lo)
        if err + float(np.sum(e)) <= tol and np.all(np.isfinite(q_hi)):
            return total + float(np.sum(q_hi)), err + float(np.sum(e))
        width = b - a
        tiny = width <= 4 * np.spacing(np.maximum(np.abs(a), np.abs(b)))
        ok = (e <= np.maximum(tol * width / length, floor)) | (e <= rtol * np.abs(q_hi)) | tiny
        if not np.all(np.isfinite(q_hi[ok])):
            raise AccuracyError("non-finite integrand values in quadrature")
        total += float(np.sum(q_hi[ok]))
        err += float(np.sum(e[ok]))
        a, b = a[~ok], b[~ok]
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    raise AccuracyError(
        f"adaptive quadrature did not reach tol={tol:g} ({a.size} cells unresolved)")


@dataclass(frozen=True)
class TruncatedLimit:
    """Limit of partial sums ``sum_k increments[k]`` with geometric tail estimate."""

    value: float
    partial: float
    tail: float
    converged: bool
    levels: int


def _ratio_ok(inc: np.ndarray, k: int, factor: float, window: int) -> bool:
    if k < window:
        return False
    prev = np.abs(inc[k - window:k])
    nxt = np.abs(inc[k - window + 1:k + 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = (nxt == 0) | (prev >= factor * nxt)
    return bool(np.all(ok))


def truncation_limit(increments, *, body: float = 0.0, rtol: float = 1e-12,
                     atol: float = 1e-300, factor: float = CAUCHY_FACTOR,
                     window: int = CAUCHY_WINDOW) -> TruncatedLimit:
    """Cauchy-increment test over a truncation sequence.

    ``increments[k]`` is the integral over the k-th shell ``[eps_{k+1}, eps_k]``.
    The scan stops at the first level where the last ``window`` increments
    each shrank by at least ``factor`` and the current increment is below
    ``rtol`` of the running sum. If the scan exhausts the sequence, the result
    is converged iff the decay test holds at the deepest levels. The remaining
    tail is extrapolated geometrically from the last two increments.
    """
    inc = np.asarray(increments, dtype=float)
    if not np.all(np.isfinite(inc)):
        return TruncatedLimit(np.nan, np.nan, np.nan, False, len(inc))
    partial = body
    stop = len(inc) - 1
    for k in range(len(inc)):
        partial += inc[k]
        if np.all(np.abs(inc[max(0, k - window + 1):k + 1]) <= atol) and k >= window - 1:
            stop = k
            break
        if _ratio_ok(inc, k, factor, window) and abs(inc[k]) <= rtol * max(abs(partial), 1e-300):
            stop = k
            break
    converged = (np.all(np.abs(inc[max(0, stop - window + 1):stop + 1]) <= atol)
                 or _ratio_ok(inc, stop, factor, window))
    tail = 0.0
    if converged and stop >= 1 and inc[stop - 1] != 0:
        q = inc[stop] / inc[stop - 1]
        if abs(q) < 1:
            tail = inc[stop] * q / (1 - q)
    return TruncatedLimit(partial + tail, partial, tail, bool(converged), stop + 1)


def resolvable_levels(upper: float, floor: float, levels: int, base: float = 4.0) -> int:
    """Number of shells ``[upper*base**-(k+1), upper*base**-k]`` whose inner
    radius stays above ``floor``, capped at ``levels``; never fewer than the
    Cauchy window needs."""
    minimum = CAUCHY_WINDOW + 2
    if upper <= floor:
        return minimum
    n = int(math.floor((math.log(upper) - math.log(floor)) / math.log(base)))
    return max(minimum, min(levels, n))


def shell_increments(f: Integrand, upper, *, base: float = 4.0, levels: int = 24,
                     order: int = GAUSS_ORDER) -> np.ndarray:
    """Integrals of ``f`` over shells ``[upper*base**-(k+1), upper*base**-k]``.

    ``upper`` may be an array; the result then has shape ``upper.shape + (levels,)``.
    """
    upper = np.asarray(upper, dtype=float)
    eps = upper[..., None] * base ** -np.arange(levels + 1, dtype=float)
    nodes, weights = cell_nodes(eps[..., 1:], eps[..., :-1], order)
    return np.sum(weights * f(nodes), axis=-1)
