"""The outer function O_h = exp(u_h + i v_h) with prescribed boundary modulus h.

Interior values come from the Poisson and conjugate-Poisson integrals of
log h on a fixed plan of Gauss cells graded toward the zeros of h; points
close to the circle get an extra grading pass around their argument.
Boundary phases are principal values, evaluated in symmetrized form with a
truncation sequence toward t = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import (TWO_PI, BoundaryFunction, arc_half_width, circle_breaks,
                       psi_radius, wrap)
from .errors import DivergenceError, DomainError, MarginError
from .modulus import Modulus
from .quadrature import (RESOLUTION_ULPS, adaptive, cell_nodes, geometric_offsets,
                         graded_breaks, resolvable_levels, truncation_limit)

INTERIOR_LIMIT = 1.0 - 1e-12
BOUNDARY_MARGIN = 1e-10
PV_LEVELS = 24


@dataclass(frozen=True)
class PhaseResult:
    """Boundary phase values with per-angle status flags ("ok", "margin", "divergent")."""

    values: np.ndarray
    flags: np.ndarray


@dataclass(eq=False)
class OuterEvaluator:
    h: BoundaryFunction
    tol: float = 1e-11
    base_cells: int = 64
    min_scale: float = 1e-14
    boundary_margin: float = BOUNDARY_MARGIN
    chunk: int = 2_000_000
    breaks: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.breaks = circle_breaks(self.h, base_cells=self.base_cells,
                                    min_scale=self.min_scale)
        self._a = self.breaks[:-1]
        self._b = self.breaks[1:]
        nodes, weights = cell_nodes(self._a, self._b)
        self._nodes = nodes
        self._weights = weights / TWO_PI
        self._logh = self.h.log(nodes)
        self._cell_width = TWO_PI / self.base_cells
        self._window = 2.0 * self._cell_width

    # -- plan ----------------------------------------------------------------
    @property
    def n_cells(self) -> int:
        return self._a.size

    def plan_log_integral(self) -> float:
        """(1/2 pi) * integral of log h reconstructed from the plan."""
        return float(np.sum(self._weights * self._logh))

    # -- interior --------------------------------------------------------------
    @staticmethod
    def _kernel(tau, r, d):
        """Poisson and conjugate kernels at offset tau = theta - arg z, r = |z|, d = 1 - r."""
        denom = d * d + 4.0 * r * np.sin(0.5 * tau) ** 2
        return d * (2.0 - d) / denom, -2.0 * r * np.sin(tau) / denom

    def _uv_far(self, z: np.ndarray) -> np.ndarray:
        nodes = self._nodes.ravel()
        wl = (self._weights * self._logh).ravel()
        out = np.empty(z.size, dtype=complex)
        step = max(1, self.chunk // max(nodes.size, 1))
        for i in range(0, z.size, step):
            zz = z[i:i + step]
            r = np.abs(zz)[:, None]
            tau = nodes[None, :] - np.angle(zz)[:, None]
            p, q = self._kernel(tau, r, 1.0 - r)
            out[i:i + step] = (p @ wl) + 1j * (q @ wl)
        return out

    def _uv_near(self, zi: complex) -> complex:
        r = abs(zi)
        d = 1.0 - r
        phi = math.atan2(zi.imag, zi.real)
        width = self._b - self._a
        da = wrap(self._a - phi + math.pi) - math.pi
        sel = (da < self._window) & (da + width > -self._window)
        wl = (self._weights * self._logh)[~sel].ravel()
        tau = self._nodes[~sel].ravel() - phi
        p, q = self._kernel(tau, r, d)
        far = complex(p @ wl, q @ wl)
        lo = float(np.min(da[sel]))
        hi = float(np.max(da[sel] + width[sel]))
        local = geometric_offsets(max(hi, -lo), d / 8.0, 0.5)
        pts = np.unique(np.concatenate([da[sel], da[sel] + width[sel], [0.0], local, -local]))
        pts = pts[(pts >= lo) & (pts <= hi)]
        tn, tw = cell_nodes(pts[:-1], pts[1:])
        logh = self.h.log(phi + tn)
        p, q = self._kernel(tn, r, d)
        wl = tw * logh / TWO_PI
        return far + complex(np.sum(p * wl), np.sum(q * wl))

    def uv(self, z) -> np.ndarray:
        """u_h(z) + i v_h(z) for interior points (vectorized)."""
        arr = np.asarray(z, dtype=complex)
        flat = arr.ravel()
        rad = np.abs(flat)
        if np.any(rad > INTERIOR_LIMIT):
            raise DomainError("interior evaluation needs |z| <= 1 - 1e-12")
        out = np.empty(flat.size, dtype=complex)
        near = (1.0 - rad) < self._window
        if np.any(~near):
            out[~near] = self._uv_far(flat[~near])
        for i in np.flatnonzero(near):
            out[i] = self._uv_near(complex(flat[i]))
        out = out.reshape(arr.shape)
        return complex(out) if out.ndim == 0 else out

    def u(self, z):
        val = np.real(self.uv(z))
        return float(val) if np.ndim(val) == 0 else val

    def v(self, z):
        val = np.imag(self.uv(z))
        return float(val) if np.ndim(val) == 0 else val

    # -- boundary --------------------------------------------------------------
    def _singular_offsets(self, theta: float) -> tuple[np.ndarray, np.ndarray]:
        """Offsets t in (0, pi] where theta +- t meets a zero, and where it meets a kink."""
        def both(points):
            t = np.concatenate([wrap(points - theta), wrap(theta - points)])
            return np.unique(t[(t > 1e-15) & (t <= math.pi)])
        z = self.h.zeros
        kinks = np.setdiff1d(wrap(self.h.breakpoints()), z)
        return both(z), both(kinks)

    def _phase(self, theta: float) -> tuple[float, bool]:
        # exact reduction to (-pi, pi] keeps angles just below 2 pi close to 0
        theta = math.remainder(theta, TWO_PI)
        sing, kinks = self._singular_offsets(theta)
        near = np.concatenate([sing, kinks])
        eps0 = min(math.pi / 4.0, 0.5 * float(near.min())) if near.size else math.pi / 4.0
        log_h = self.h.log

        def g(t):
            return (log_h(theta - t) - log_h(theta + t)) / np.tan(0.5 * t)

        # the kernel is ~2/t, so grading toward a singular offset c must reach
        # below min_scale * c to keep the innermost cells negligible
        scale = self.min_scale * min(1.0, float(sing.min())) if sing.size else self.min_scale
        breaks = graded_breaks(eps0, math.pi, sing, min_scale=scale,
                               extra=kinks, base_cells=16)
        body, _ = adaptive(g, breaks, tol=self.tol)
        # theta +- t is only resolved for t well above the spacing of floats near theta
        levels = resolvable_levels(eps0, RESOLUTION_ULPS * math.ulp(theta), PV_LEVELS)
        hi = eps0 * 4.0 ** -np.arange(levels, dtype=float)
        nodes, weights = cell_nodes(0.25 * hi, hi)
        inc = np.sum(weights * g(nodes), axis=-1)
        lim = truncation_limit(inc, body=body, rtol=1e-13, atol=1e-15)
        return lim.value / TWO_PI, lim.converged

    def phases(self, theta) -> PhaseResult:
        """Boundary phase v_h at each angle with status flags instead of exceptions."""
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        vals = np.full(th.size, np.nan)
        flags = np.empty(th.size, dtype=object)
        dist = np.atleast_1d(self.h.zero_distance(th))
        for i, t in enumerate(th):
            if dist[i] < self.boundary_margin:
                flags[i] = "margin"
                continue
            val, ok = self._phase(float(t))
            vals[i] = val
            flags[i] = "ok" if ok else "divergent"
        return PhaseResult(vals, flags)

    def v_boundary(self, theta):
        """Principal-value boundary phase (1/2 pi) int_0^pi [log h(th-t) - log h(th+t)] / tan(t/2) dt."""
        res = self.phases(theta)
        if np.any(res.flags == "margin"):
            raise MarginError("boundary phase requested within the margin of the zero set")
        if np.any(res.flags == "divergent"):
            raise DivergenceError("boundary phase truncation sequence failed the Cauchy test")
        return float(res.values[0]) if np.ndim(theta) == 0 else res.values

    # -- O_h^rho ---------------------------------------------------------------
    def evaluate(self, z, rho: float = 1.0
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """O_h(z)**rho on the closed disk, together with u, v and per-point flags.

        Boundary points on the zero set give 0 ("zero"); points within the
        margin give NaN ("margin"); failed phase limits give NaN ("divergent").
        """
        if rho < 1:
            raise DomainError("rho must be >= 1")
        arr = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        rad = np.abs(arr)
        if np.any(rad > 1.0 + 1e-12):
            raise DomainError("point outside the closed unit disk")
        out = np.full(arr.size, np.nan + 0j)
        u = np.full(arr.size, np.nan)
        v = np.full(arr.size, np.nan)
        flags = np.full(arr.size, "ok", dtype=object)
        inner = rad <= INTERIOR_LIMIT
        if np.any(inner):
            w = self.uv(arr[inner])
            u[inner], v[inner] = w.real, w.imag
            out[inner] = np.exp(rho * w)
        bnd = np.flatnonzero(~inner)
        if bnd.size:
            th = np.angle(arr[bnd])
            dist = np.atleast_1d(self.h.zero_distance(th))
            on_zero = dist == 0.0
            out[bnd[on_zero]] = 0.0
            u[bnd[on_zero]] = -np.inf
            flags[bnd[on_zero]] = "zero"
            rest = bnd[~on_zero]
            if rest.size:
                ph = self.phases(np.angle(arr[rest]))
                hv = np.atleast_1d(self.h(np.angle(arr[rest])))
                good = ph.flags == "ok"
                flags[rest] = ph.flags
                v[rest] = ph.values
                with np.errstate(divide="ignore"):
                    u[rest] = np.log(hv)
                out[rest[good]] = hv[good] ** rho * np.exp(1j * rho * ph.values[good])
        return out, u, v, flags

    def value(self, z, rho: float = 1.0):
        """O_h(z)**rho; raises :class:`MarginError` near the zero set."""
        out, _, _, flags = self.evaluate(z, rho)
        if np.any(flags == "margin"):
            raise MarginError("boundary value requested within the margin of the zero set")
        if np.any(flags == "divergent"):
            raise DivergenceError("boundary phase truncation sequence failed the Cauchy test")
        return complex(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))

    # -- conjugate limit ---------------------------------------------------------
    def convergence_probe(self, xi: float, radii, psi: Modulus | None = None,
                          n_phi: int = 33, psi_t: float | None = None) -> np.ndarray:
        """max over phi in the psi-arc around xi of |v(r e^{i phi}) - v(e^{i phi})| per radius."""
        psi = psi if psi is not None else Modulus.power(1.0)
        half = float(arc_half_width(psi_radius(self.h, psi, xi, psi_t)))
        phi = xi + np.linspace(-half, half, n_phi)
        ph = self.phases(phi)
        keep = ph.flags == "ok"
        phi, vb = phi[keep], ph.values[keep]
        out = []
        for r in np.asarray(radii, dtype=float):
            vi = self.v(r * np.exp(1j * phi))
            out.append(float(np.max(np.abs(vi - vb))) if phi.size else 0.0)
        return np.array(out)
