"""Envelope solutions, their fiber profiles and the checks run on them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import ConstructionError, NonConvergence, PreconditionError
from .boundary import BIG, MaxCap, impose_boundary
from .grid import FLOOR, INTERIOR
from .legendre import envelope_integral, legendre_envelope, upper_envelope
from .stencil import StencilSpec, diagnostics, scaled_tolerance

METHODS = ("legendre", "sweep")


@dataclass
class FiberProfile:
    """``t ↦ v(z0, t)`` with the node samples it was built from."""

    t: np.ndarray
    v: np.ndarray
    fn: object = field(repr=False, default=None)

    def __call__(self, t):
        if self.fn is not None:
            return self.fn(np.asarray(t, dtype=float))
        return np.interp(t, self.t, self.v)


@dataclass
class ConstantEstimate:
    """``S`` with an additive uncertainty: the true value lies in ``S ± uncertainty``."""

    value: float
    uncertainty: float
    tail: float
    method: str

    def to_dict(self):
        return {"value": self.value, "uncertainty": self.uncertainty, "tail": self.tail,
                "method": self.method}


@dataclass
class EnvelopeSolution:
    """Discrete envelope ``v`` on the nodes of ``grid``.

    ``v`` is NaN on Outside nodes, equals the boundary data on boundary
    nodes and holds the solver output on Interior and floor nodes.
    """

    grid: object
    bd: object
    v: np.ndarray = field(repr=False)
    method: str
    converged: bool
    iterations: int
    final_change: float
    saturation_residual: float
    psh_violation: float
    history: list = field(default_factory=list, repr=False)
    stencil: StencilSpec = field(default_factory=StencilSpec)
    legendre: object = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    # ------------------------------------------------------------------
    def _lattice_lookup(self):
        if "_lookup" not in self.__dict__:
            L = self.legendre
            g = self.grid
            # nearest inside node for every lattice node
            _, (jn, in_) = ndimage.distance_transform_edt(~g.in_xy, return_indices=True)
            self.__dict__["_lookup"] = L.op.index[jn, in_]
        return self.__dict__["_lookup"]

    def evaluate(self, z, t):
        """``v`` at arbitrary points ``(z, t)`` of the lift.

        For the slope representation the exact upper envelope in ``t`` is
        taken on the four surrounding lattice columns and interpolated
        bilinearly in ``z`` (columns outside the base domain are replaced by
        the nearest inside one).  For the sweep method the node field is
        interpolated trilinearly.
        """
        z = np.asarray(z, dtype=complex)
        t = np.asarray(t, dtype=float)
        z, t = np.broadcast_arrays(z, t)
        g = self.grid
        if self.legendre is None:
            from .stencil import _trilinear
            tt = np.clip(t, g.t[0], g.t[-1])
            idx, w = _trilinear(g, z.ravel(), tt.ravel())
            vf = self.v.ravel()[idx]
            return np.sum(vf * w, axis=1).reshape(z.shape)
        L = self.legendre
        look = self._lattice_lookup()
        n = g.n_xy
        zr = z.ravel()
        tf = t.ravel()
        fx = np.clip((zr.real - g.x[0]) / g.h, 0, n - 1)
        fy = np.clip((zr.imag - g.x[0]) / g.h, 0, n - 1)
        i = np.minimum(np.floor(fx).astype(int), n - 2)
        j = np.minimum(np.floor(fy).astype(int), n - 2)
        ax, ay = fx - i, fy - j
        out = np.zeros(zr.shape)
        for dj, wj in ((0, 1 - ay), (1, ay)):
            for di, wi in ((0, 1 - ax), (1, ax)):
                out += wj * wi * L.column_value(look[j + dj, i + di], tf)
        return out.reshape(z.shape)

    def slice_fiber(self, z0=0.0):
        """Profile ``t ↦ v(z0, t)`` over the fiber (``z0`` must be a lattice node)."""
        g = self.grid
        i = int(round((complex(z0).real - g.x[0]) / g.h))
        j = int(round((complex(z0).imag - g.x[0]) / g.h))
        if abs(g.x[i] + 1j * g.x[j] - complex(z0)) > 1e-9 * g.h:
            raise ConstructionError("z0 is not a lattice node")
        col = g.mask[:, j, i]
        if not np.any(col == INTERIOR):
            raise PreconditionError("fiber over z0 has no Interior node", complex(z0))
        ok = (col == INTERIOR) | (col == FLOOR)
        if self.legendre is not None:
            L = self.legendre
            h = L.H[:, L.op.index[j, i]]
            return FiberProfile(g.t[ok], self.v[ok, j, i],
                                fn=lambda tt: upper_envelope(h, L.s, tt))
        return FiberProfile(g.t[ok], self.v[ok, j, i])

    def tolerance(self, base=5e-3):
        return scaled_tolerance(self.grid, base)

    def summary(self):
        return {"method": self.method, "converged": self.converged,
                "iterations": self.iterations, "final_change": self.final_change,
                "saturation_residual": self.saturation_residual,
                "psh_violation": self.psh_violation, "tolerance": self.tolerance(),
                "grid": self.grid.describe(), "boundary": self.bd.describe(),
                "stencil": self.stencil.to_dict(), **self.meta}


# ----------------------------------------------------------------------
def _assemble_field(grid, bd, L):
    v = impose_boundary(grid, bd)
    sel = (grid.mask == INTERIOR) | (grid.mask == FLOOR)
    k, j, i = np.nonzero(sel)
    v[sel] = L.column_value(L.op.index[j, i], grid.t[k])
    return v


def solve_envelope(grid, bd, stencil=None, tol=1e-7, max_sweeps=20_000, method="legendre",
                   diagnose=True, max_nodes=50_000, threads=1):
    """Maximal discrete psh function below the boundary data.

    ``method="legendre"`` solves the slope problems exactly (see
    ``legendre``); ``method="sweep"`` runs the wide-stencil iteration (see
    ``sweep``), which is slower and meant for coarse cross-checks.  Both
    report the circle-average diagnostics of the resulting node field.

    Raises
    ------
    NonConvergence
        The sweep hit ``max_sweeps`` with sup-change above ``tol``.
    """
    stencil = stencil or StencilSpec()
    if method not in METHODS:
        raise ConstructionError(f"unknown method {method!r}")
    if method == "legendre":
        L = legendre_envelope(grid, bd)
        v = _assemble_field(grid, bd, L)
        sol = EnvelopeSolution(grid, bd, v, method, True, L.policy_iterations,
                               L.max_residual, np.nan, np.nan, [], stencil, L,
                               {"n_slopes": int(L.s.size)})
    else:
        from .sweep import sweep_solve
        v, history, converged = sweep_solve(grid, bd, stencil, tol, max_sweeps, threads)
        sol = EnvelopeSolution(grid, bd, v, method, converged, len(history),
                               history[-1] if history else 0.0, np.nan, np.nan, history,
                               stencil)
    if diagnose:
        fn = sol.evaluate if sol.legendre is not None else None
        d = diagnostics(grid, bd, sol.v, stencil, value_fn=fn, max_nodes=max_nodes)
        sol.saturation_residual = d.saturation_residual
        sol.psh_violation = d.psh_violation
        sol.meta["diagnostics"] = d.to_dict()
    if not sol.converged:
        raise NonConvergence("envelope sweep did not reach tolerance",
                             {"iterations": sol.iterations, "final_change": sol.final_change,
                              "solution": sol})
    return sol


def slice_fiber(sol, z0=0.0):
    return sol.slice_fiber(z0)


def sharper_constant_ma(sol, quad=None):
    """``π ∫ e^{t − v(0, t)} dt`` over the fiber ``t < −φ(0)`` above the origin.

    For the slope representation the integrand is piecewise exponential and
    is integrated exactly, tail included.  For a node field the trapezoid
    rule is used on the floor-to-top nodes and the part below the floor is
    bracketed by the floor value and the minimum of ``v``.
    """
    if not sol.converged:
        raise NonConvergence("solution did not converge", {"iterations": sol.iterations})
    g = sol.grid
    top0 = float(g.hd.fiber_top(0.0))
    if sol.legendre is not None:
        L = sol.legendre
        m = g.origin
        h = L.H[:, L.op.index[m[0], m[1]]]
        val, _, _ = envelope_integral(h, L.s, top0)
        return ConstantEstimate(float(np.pi * val), 0.0, 0.0, "exact-envelope")
    prof = sol.slice_fiber(0.0)
    t, v = prof.t, prof.v
    keep = t < top0
    t, v = t[keep], v[keep]
    g_top = float(np.minimum(sol.bd.graph_value(np.array([0j]), np.array([top0]))[0], BIG))
    tt = np.append(t, top0)
    vv = np.append(v, g_top)
    f = np.exp(tt - vv)
    body = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(tt)))
    tail = float(np.exp(t[0] - v[0]))
    bound = float(np.exp(t[0] - np.min(v)))
    return ConstantEstimate(np.pi * (body + tail), np.pi * bound, np.pi * tail, "trapezoid")


def comparison_check(sol1, sol2, tol=0.0):
    """``min over Interior of (v2 − v1)`` for data ``g1 ≤ g2`` on a common grid."""
    if not sol1.grid.same_as(sol2.grid):
        raise ConstructionError("solutions live on different grids")
    b = sol1.grid.boundary
    diff = sol2.v[b] - sol1.v[b]
    if np.any(diff < -tol):
        k = int(np.argmin(diff))
        node = tuple(int(q[k]) for q in np.nonzero(b))
        raise PreconditionError("boundary data are not ordered", node)
    inter = sol1.grid.interior
    return float(np.min(sol2.v[inter] - sol1.v[inter]))


def check_C(domain, C, n=1000):
    """Verify ``max(log|z|², C) < B(z)`` on Ω through ``C < B`` on a boundary sample.

    ``B`` is harmonic, so its minimum over the closure sits on the boundary,
    while ``log|z|² − B = G < 0`` inside.  Raises ``PreconditionError``
    carrying the worst boundary point.
    """
    zb = np.asarray(domain.boundary_sample(n))
    r = domain.radius if domain.is_disc else None
    if r is not None:
        B = np.full(zb.shape, 2 * np.log(r))
    else:
        B = np.log(np.abs(zb) ** 2)
    k = int(np.argmin(B))
    if not C < B[k]:
        raise PreconditionError(f"C = {C} is not below the shift B = {B[k]:.6g} on the boundary",
                                complex(zb[k]))
    return float(B[k] - C)


def harmonic_minorant_check(sol, domain):
    """``min over Interior of (v + B(z))``; nonnegative up to discretization."""
    if not isinstance(sol.bd, MaxCap):
        raise ConstructionError("harmonic minorant check needs MaxCap data")
    check_C(domain, sol.bd.C)
    g = sol.grid
    z, _ = g.node_coords(g.interior)
    B = domain.shift(z)
    return float(np.min(sol.v[g.interior] + B))
