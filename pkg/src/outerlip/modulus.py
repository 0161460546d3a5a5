"""Moduli of continuity on [0, 2]: evaluation, generalized inverse, classification.

Three families are supported: ``power`` (t**alpha), ``logtype``
(1/(1 + |log t|) on (0, 1], continued by 1 + log t on [1, 2]) and ``table``
(piecewise-linear through knots). Any of them can be raised to an exponent
``p`` in (0, 1], which keeps the modulus axioms and realizes psi**(1/rho).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .quadrature import adaptive, cell_nodes, geometric_offsets, truncation_limit

TOL_STAR = 1e-12
CLASSIFY_RTOL = 1e-3
_LN10 = math.log(10.0)


@dataclass(frozen=True, eq=False)
class Modulus:
    family: str
    alpha: float = 1.0
    exponent: float = 1.0
    knots_t: np.ndarray | None = field(default=None, repr=False)
    knots_w: np.ndarray | None = field(default=None, repr=False)
    label: str | None = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def power(cls, alpha: float) -> "Modulus":
        if not 0 < alpha <= 1:
            raise DomainError(f"power exponent must lie in (0, 1], got {alpha}")
        return cls("power", alpha=float(alpha))

    @classmethod
    def logtype(cls) -> "Modulus":
        return cls("logtype")

    @classmethod
    def table(cls, t: Sequence[float], w: Sequence[float], label: str | None = None) -> "Modulus":
        t = np.asarray(t, dtype=float)
        w = np.asarray(w, dtype=float)
        if t.ndim != 1 or t.shape != w.shape or t.size < 2:
            raise ConfigError("table modulus needs matching 1-d knot arrays")
        if np.any(np.diff(t) <= 0):
            raise ConfigError("table knots must have strictly increasing t")
        if t[0] != 0.0 or w[0] != 0.0:
            raise ConfigError("table must start with the knot (0, 0)")
        if t[-1] > 2.0:
            raise ConfigError("table knots must lie in [0, 2]")
        t.setflags(write=False)
        w.setflags(write=False)
        return cls("table", knots_t=t, knots_w=w, label=label)

    @classmethod
    def from_csv(cls, path: str | Path) -> "Modulus":
        path = Path(path)
        try:
            with path.open(newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        if not rows or [c.strip() for c in rows[0]] != ["t", "omega"]:
            raise ConfigError(f"{path}: expected header 't,omega'")
        try:
            data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
        except ValueError as exc:
            raise ConfigError(f"{path}: non-numeric entry ({exc})") from exc
        if data.ndim != 2 or data.shape[1] != 2:
            raise ConfigError(f"{path}: expected two columns")
        return cls.table(data[:, 0], data[:, 1], label=path.name)

    def pow(self, p: float) -> "Modulus":
        """The modulus t -> omega(t)**p, 0 < p <= 1."""
        if not 0 < p <= 1:
            raise DomainError(f"exponent must lie in (0, 1], got {p}")
        return Modulus(self.family, self.alpha, self.exponent * p, self.knots_t,
                       self.knots_w, self.label)

    @property
    def name(self) -> str:
        if self.family == "power":
            base = f"power:{self.alpha:g}"
        elif self.family == "logtype":
            base = "logtype"
        else:
            base = f"table:{self.label or 'inline'}"
        return base if self.exponent == 1.0 else f"{base}^{self.exponent:g}"

    # -- evaluation ---------------------------------------------------------
    def _base(self, t: np.ndarray) -> np.ndarray:
        if self.family == "power":
            return t ** self.alpha
        if self.family == "logtype":
            out = np.zeros_like(t)
            lo = (t > 0) & (t <= 1)
            hi = t > 1
            out[lo] = 1.0 / (1.0 - np.log(t[lo]))
            out[hi] = 1.0 + np.log(t[hi])
            return out
        return np.interp(t, self.knots_t, self.knots_w)

    def __call__(self, t, *, extend: bool = False):
        """omega(t) for t in [0, 2]; ``extend`` continues by omega(2) up to 4."""
        arr = np.asarray(t, dtype=float)
        hi = 4.0 if extend else 2.0
        if np.any(arr < 0) or np.any(arr > hi) or np.any(np.isnan(arr)):
            raise DomainError(f"modulus argument outside [0, {hi:g}]")
        arr = np.minimum(arr, 2.0)
        out = self._base(arr)
        if self.exponent != 1.0:
            out = out ** self.exponent
        return float(out) if np.ndim(out) == 0 else out

    eval = __call__

    def log_at(self, logt) -> np.ndarray:
        """log omega(exp(logt)), accurate far below the float range of t."""
        x = np.asarray(logt, dtype=float)
        if np.any(x > math.log(2.0) + 1e-15):
            raise DomainError("log_at argument exceeds log 2")
        if self.family == "power":
            out = self.alpha * x
        elif self.family == "logtype":
            out = np.where(x <= 0, -np.log1p(-np.minimum(x, 0.0)), np.log1p(np.maximum(x, 0.0)))
        else:
            t1, w1 = self.knots_t[1], self.knots_w[1]
            t = np.exp(x)
            with np.errstate(divide="ignore"):
                out = np.where(t < t1, math.log(w1 / t1) + x if w1 > 0 else -np.inf,
                               np.log(np.interp(t, self.knots_t, self.knots_w)))
        return self.exponent * out

    def inverse_star(self, t, *, tol: float = TOL_STAR):
        """Leftmost u in [0, 1] with omega(u) = t, by vectorized bisection.

        The bracket is shrunk until its width is below ``tol`` relative to
        the upper end, so the result is accurate even for tiny t.
        """
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0) or np.any(arr > 1):
            raise DomainError("inverse_star argument outside [0, 1]")
        lo = np.zeros_like(arr)
        hi = np.ones_like(arr)
        hi = np.where(arr <= 0, 0.0, hi)
        for _ in range(1100):
            active = hi - lo > tol * hi
            if not np.any(active):
                break
            mid = 0.5 * (lo + hi)
            stuck = (mid <= lo) | (mid >= hi)
            active &= ~stuck
            if not np.any(active):
                break
            up = self(mid) >= arr
            hi = np.where(active & up, mid, hi)
            lo = np.where(active & ~up, mid, lo)
        return float(hi) if np.ndim(hi) == 0 else hi


# ---------------------------------------------------------------------------
# classification


@dataclass
class ClassificationResult:
    kind: str
    constant: float | None
    divergent: bool
    witness: float | None
    grid_levels: list

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "constant": self.constant,
            "divergent": self.divergent,
            "witness": self.witness,
            "grid_levels": self.grid_levels,
        }


def s_levels(lower: float = 1e-12, per_decade: int = 64, levels: int = 3,
             deepen: float = 1e-4) -> list[np.ndarray]:
    """Nested probe grids ``2 * 10**(-j/per_decade)``; each level reaches
    ``deepen`` times further toward 0 than the previous one."""
    out = []
    for lvl in range(levels):
        low = lower * deepen ** lvl
        n = int(math.ceil(math.log10(2.0 / low) * per_decade))
        out.append(2.0 * 10.0 ** (-np.arange(n + 1) / per_decade))
    return out


def _refined(kind: str, values: list[float], witnesses: list[float], rtol: float,
             cauchy_ok: bool) -> ClassificationResult:
    last, prev = values[-1], values[-2] if len(values) > 1 else values[-1]
    stable = abs(last - prev) <= rtol * max(abs(last), abs(prev))
    ok = cauchy_ok and stable and math.isfinite(last)
    return ClassificationResult(kind, float(last) if ok else None, not ok,
                                float(witnesses[-1]), [float(v) for v in values])


def _dini_integral(m: Modulus, s: np.ndarray, levels: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """int_0^s omega(t)/t dt via dyadic truncation eps_k = s 2^-k."""
    eps = s[:, None] * 2.0 ** -np.arange(levels + 1, dtype=float)
    nodes, weights = cell_nodes(eps[:, 1:], eps[:, :-1])
    inc = np.sum(weights * m(nodes) / nodes, axis=-1)
    vals = np.empty(len(s))
    ok = np.empty(len(s), dtype=bool)
    for i in range(len(s)):
        lim = truncation_limit(inc[i], rtol=1e-13)
        vals[i], ok[i] = lim.value, lim.converged
    return vals, ok


def fast_constant(m: Modulus, probe: list[np.ndarray] | None = None,
                  rtol: float = CLASSIFY_RTOL) -> ClassificationResult:
    """sup_s (int_0^s omega(t)/t dt) / omega(s) over nested probe grids."""
    probe = probe if probe is not None else s_levels()
    values, witnesses, cauchy_ok = [], [], True
    for s in probe:
        s = np.asarray(s, dtype=float)
        integral, ok = _dini_integral(m, s)
        cauchy_ok &= bool(np.all(ok))
        ratio = integral / m(s)
        j = int(np.nanargmax(ratio))
        values.append(float(ratio[j]))
        witnesses.append(float(s[j]))
    return _refined("fast", values, witnesses, rtol, cauchy_ok)


def _tail_integral(m: Modulus, s: float, tol: float = 1e-10) -> float:
    breaks = np.unique(np.concatenate([s * 2.0 ** np.arange(int(math.log2(2.0 / s)) + 1), [2.0]]))
    breaks = breaks[breaks >= s]
    scale = float(m(s)) / s
    val, _ = adaptive(lambda t: m(t) / t ** 2, breaks, tol=tol * scale)
    return val


def slow_constant(m: Modulus, probe: list[np.ndarray] | None = None,
                  rtol: float = CLASSIFY_RTOL) -> ClassificationResult:
    """sup_s (int_s^2 omega(t)/t^2 dt) / (omega(s)/s) over nested probe grids."""
    probe = probe if probe is not None else s_levels()
    values, witnesses = [], []
    cache: dict[float, float] = {}
    for s in probe:
        s = np.asarray(s, dtype=float)
        s = s[s < 2.0]
        ratio = np.empty(len(s))
        for i, si in enumerate(s):
            if si not in cache:
                cache[si] = _tail_integral(m, float(si)) / (float(m(si)) / si)
            ratio[i] = cache[si]
        j = int(np.argmax(ratio))
        values.append(float(ratio[j]))
        witnesses.append(float(s[j]))
    return _refined("slow", values, witnesses, rtol, True)


def logt_levels(levels: int = 3, per_decade: int = 64, lmax0: float = 1e4,
                deepen: float = 100.0, upper: float = math.log(math.sqrt(2.0))) -> list[np.ndarray]:
    """Nested probe grids in log t for the rho-slow infimum.

    Near t = 1 the points are log-spaced in t; below t = e^-10 they are
    log-spaced in L = -log t up to ``lmax0 * deepen**level``.
    """
    step = _LN10 / per_decade
    near = upper - step * np.arange(int((upper + 10.0) / step) + 1)
    out = []
    for lvl in range(levels):
        lmax = lmax0 * deepen ** lvl
        n = int(math.ceil(math.log10(lmax / 10.0) * per_decade))
        far = -10.0 * 10.0 ** (np.arange(1, n + 1) / per_decade)
        out.append(np.concatenate([near, far]))
    return out


def rho_slow_eta(m: Modulus, rho: float, probe: list[np.ndarray] | None = None,
                 rtol: float = CLASSIFY_RTOL, full_range: bool = False) -> ClassificationResult:
    """inf_t omega(t^2) / omega(t)^rho, evaluated in log space.

    The probe is restricted to t in (0, sqrt 2]; with ``full_range`` it runs to
    t = 2 and omega is continued by the constant omega(2) beyond 2.
    """
    if not 1 <= rho <= 2:
        raise DomainError("rho must lie in [1, 2]")
    upper = math.log(2.0) if full_range else math.log(math.sqrt(2.0))
    probe = probe if probe is not None else logt_levels(upper=upper)
    values, witnesses = [], []
    for logt in probe:
        logt = np.asarray(logt, dtype=float)
        sq = np.minimum(2.0 * logt, math.log(2.0)) if full_range else 2.0 * logt
        log_ratio = m.log_at(sq) - rho * m.log_at(logt)
        j = int(np.argmin(log_ratio))
        values.append(float(np.exp(log_ratio[j])))
        witnesses.append(float(np.exp(logt[j])))
    last, prev = values[-1], values[-2] if len(values) > 1 else values[-1]
    stable = last > 0 and abs(last - prev) <= rtol * max(last, prev)
    return ClassificationResult("rho_slow", float(last) if stable else 0.0, False,
                                witnesses[-1], values)


# ---------------------------------------------------------------------------
# axioms


def validation_grid(m: Modulus) -> np.ndarray:
    if m.family == "table":
        kt = m.knots_t
        mids = 0.5 * (kt[1:] + kt[:-1])
        grid = np.concatenate([kt, mids, [1.0, 2.0]])
    else:
        grid = np.concatenate([np.linspace(0.0, 2.0, 4097), np.logspace(-12, 0, 1201)])
    return np.unique(grid[(grid >= 0) & (grid <= 2)])


def validate(m: Modulus, atol: float = 1e-12) -> list[str]:
    """Violations of the modulus axioms on the validation grid (empty if valid)."""
    out = []
    if abs(m(0.0)) > atol:
        out.append(f"normalization: omega(0) = {m(0.0):g}, expected 0")
    if abs(m(1.0) - 1.0) > atol:
        out.append(f"normalization: omega(1) = {m(1.0):g}, expected 1")
    t = validation_grid(m)
    w = m(t)
    dw = np.diff(w)
    for i in np.flatnonzero(dw < -atol)[:5]:
        out.append(f"monotonicity: omega decreases between {t[i]:g} and {t[i + 1]:g}")
    pos = t > 0
    tp, ratio = t[pos], w[pos] / t[pos]
    dr = np.diff(ratio)
    for i in np.flatnonzero(dr > atol * np.maximum(1.0, np.abs(ratio[1:])))[:5]:
        out.append(f"ratio: omega(t)/t increasing between {tp[i]:g} and {tp[i + 1]:g}")
    return out


def dense_points(lower: float = 1e-12, per_decade: int = 16) -> np.ndarray:
    """Log-spaced points in (0, 1]; handy probe for property checks."""
    return geometric_offsets(1.0, lower, 10.0 ** (-1.0 / per_decade))
