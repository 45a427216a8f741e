"""S¹-invariant boundary data on the lift, as functions of ``(z, t = log|w|²)``.

Besides point values, each descriptor provides the wall cap used by the
Legendre solver,

    γ_s(z_b) = inf_{t ≤ t_b} [ g(z_b, t) − s t ],      s ≥ 0,

where ``t_b = −φ(z_b)`` is the top of the fiber over a wall point.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConstructionError, NumericError
from ..radial_weights import Power, psi_t
from .grid import GRAPH, VERTICAL

# stand-in for +∞ (fiber tops where the data blows up, degenerate walls)
BIG = 1e10
# Custom data is evaluated with t clipped to this value from below
T_CLIP = -50.0


class BoundaryData:
    kind = "abstract"
    z_only = False

    def value(self, z, t):
        raise NotImplementedError

    def graph_value(self, z, top):
        return self.value(z, top)

    def wall_caps(self, zb, tb):
        """Return ``s ↦ γ_s`` at wall points ``zb`` whose fiber top is ``tb``."""
        zb = np.asarray(zb, dtype=complex)
        tb = np.asarray(tb, dtype=float)
        fin = np.isfinite(tb)
        if self.z_only:
            g = self.value(zb, np.zeros(zb.shape))

            def cap(s):
                with np.errstate(invalid="ignore"):
                    out = np.where(fin, g - s * np.where(fin, tb, 0.0), BIG if s > 0 else g)
                return np.minimum(out, BIG)
            return cap
        return self._sampled_caps(zb, tb)

    def _sampled_caps(self, zb, tb, n=400):
        # g is taken constant below T_CLIP, so the infimum over t ≤ t_b is
        # attained on [T_CLIP, t_b]; sample that interval once per wall point
        fin = np.isfinite(tb)
        hi = np.where(fin, np.maximum(np.minimum(tb, 0.0), T_CLIP), T_CLIP)
        u = np.linspace(0.0, 1.0, n)
        ts = T_CLIP + (hi - T_CLIP)[:, None] * u[None, :]
        G = self.value(np.repeat(zb[:, None], n, axis=1), ts)
        g_floor = G[:, 0]

        def cap(s):
            if s == 0:
                out = np.min(G, axis=1)
            else:
                out = np.where(fin, np.min(G - s * ts, axis=1), BIG)
            out = np.where(fin | (s > 0), out, g_floor)
            return np.minimum(out, BIG)
        return cap

    def describe(self):
        raise NotImplementedError

    def upper_bound(self):
        return None


class MaxCap(BoundaryData):
    """``g = −max(log|z|², C)`` for a negative constant ``C``."""

    kind = "MaxCap"
    z_only = True

    def __init__(self, C):
        C = float(C)
        if not (np.isfinite(C) and C < 0):
            raise ConstructionError("MaxCap needs a negative real C")
        self.C = C

    def value(self, z, t):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            lz = np.log(np.abs(z) ** 2)
        return -np.maximum(lz, self.C) + np.zeros(np.broadcast(z, t).shape)

    def describe(self):
        return {"kind": "MaxCap", "C": self.C}

    def upper_bound(self):
        return -self.C


class ConstantTest(BoundaryData):
    kind = "ConstantTest"
    z_only = True

    def __init__(self, c):
        self.c = float(c)

    def value(self, z, t):
        return np.full(np.broadcast(np.asarray(z), np.asarray(t)).shape, self.c)

    def describe(self):
        return {"kind": "ConstantTest", "c": self.c}

    def upper_bound(self):
        return self.c


class RadialOracle(BoundaryData):
    """``g = ψ(t) = −u⁻¹(−t)``; values at ``t ≥ 0`` are capped at ``BIG``."""

    kind = "RadialOracle"

    def __init__(self, profile):
        self.profile = profile

    def value(self, z, t):
        t = np.asarray(t, dtype=float)
        shape = np.broadcast(np.asarray(z), t).shape
        t = np.broadcast_to(t, shape)
        out = np.full(shape, BIG)
        ok = t < 0
        if ok.any():
            out[ok] = np.minimum(psi_t(self.profile, t[ok]), BIG)
        return out

    def wall_caps(self, zb, tb):
        if not isinstance(self.profile, Power):
            return self._sampled_caps(np.asarray(zb, complex), np.asarray(tb, float))
        tb = np.asarray(tb, dtype=float)
        fin = np.isfinite(tb)
        prof = self.profile

        def cap(s):
            with np.errstate(invalid="ignore"):
                out = np.where(fin, prof.legendre_min(s, np.minimum(np.where(fin, tb, -1.0), 0)),
                               BIG if s > 0 else 0.0)
            return np.minimum(out, BIG)
        return cap

    def describe(self):
        return {"kind": "RadialOracle", "profile": self.profile.describe()}


class Custom(BoundaryData):
    """User data ``g(z, t)`` (vectorized callable); ``t`` is clipped at ``T_CLIP``."""

    kind = "Custom"

    def __init__(self, fn, name="custom", upper=None):
        self.fn = fn
        self.name = name
        self._upper = upper

    def value(self, z, t):
        t = np.maximum(np.asarray(t, dtype=float), T_CLIP)
        out = np.asarray(self.fn(np.asarray(z, dtype=complex), t), dtype=float)
        return np.broadcast_to(out, np.broadcast(np.asarray(z), t).shape).copy()

    def describe(self):
        return {"kind": "Custom", "name": self.name}

    def upper_bound(self):
        return self._upper


def impose_boundary(grid, bd):
    """Boundary values on the grid: ``g`` at the projection of each boundary node.

    Returns an array shaped like the grid with NaN off the boundary band.
    """
    out = np.full(grid.shape, np.nan)
    sel = grid.boundary
    vals = bd.value(grid.proj_z[sel], grid.proj_t[sel])
    if np.any(np.isnan(vals)):
        raise NumericError("boundary data evaluated to NaN")
    out[sel] = np.minimum(vals, BIG)
    return out


def boundary_from_config(cfg, profile=None):
    kind = cfg.get("kind", "MaxCap")
    if kind == "MaxCap":
        return MaxCap(cfg["C"])
    if kind == "ConstantTest":
        return ConstantTest(cfg["c"])
    if kind == "RadialOracle":
        if profile is None:
            raise ConstructionError("RadialOracle needs a radial profile")
        return RadialOracle(profile)
    raise ConstructionError(f"unknown boundary data kind {kind!r}")
