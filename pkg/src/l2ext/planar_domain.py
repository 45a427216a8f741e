"""Bounded simply connected planar domains containing the origin.

Every supported domain is the image of the unit disc under a polynomial
map ``f(ζ) = c₁ζ + c₂ζ² + …`` with ``f(0) = 0``.  The unit disc and the disc
of radius ``R`` are the special cases ``[1]`` and ``[R]`` and get closed-form
fast paths.  The Green function with pole at 0 is ``log|f⁻¹(z)|²`` and the
shift is ``B(z) = log|z|² − G(z)``.
"""

from __future__ import annotations

import numpy as np
import shapely

from .errors import ConstructionError, DomainError, IndeterminateMembership

NEWTON_TOL = 1e-12
_SEED_RADII = np.linspace(0.0, 1.15, 24)
_SEED_ANGLES = 2 * np.pi * np.arange(64) / 64


class PlanarDomain:
    """A planar domain given as the image of the unit disc.

    Parameters
    ----------
    kind : {"unit_disc", "disc", "conformal"}
    coeffs : sequence of complex
        Taylor coefficients ``c₁, c₂, …`` of the univalent map.
    """

    def __init__(self, kind, coeffs):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if coeffs.ndim != 1 or coeffs.size == 0 or not np.all(np.isfinite(coeffs)):
            raise ConstructionError("coefficients must be a nonempty finite list")
        if coeffs[0] == 0:
            raise ConstructionError("c1 must be nonzero (f'(0) != 0)")
        self.kind = kind
        self.coeffs = coeffs
        # f(ζ)/ζ and f'(ζ) as numpy polynomials in ascending order
        self._q = np.polynomial.Polynomial(coeffs)
        self._f = np.polynomial.Polynomial(np.concatenate([[0], coeffs]))
        self._df = self._f.deriv()
        self.radius = float(abs(coeffs[0])) if coeffs.size == 1 else None
        if kind == "conformal":
            self._validate_univalent()
        ring = self.boundary_sample(4096 if kind == "conformal" else 512)
        self._rbox = (self.radius if self.radius is not None
                      else float(np.max(np.abs(ring)) * (1 + 1e-3)))
        self._ring = shapely.LinearRing(np.column_stack([ring.real, ring.imag]))

    # constructors ---------------------------------------------------------
    @classmethod
    def unit_disc(cls):
        return cls("unit_disc", [1.0])

    @classmethod
    def disc(cls, R):
        if not (np.isfinite(R) and R > 0):
            raise ConstructionError("disc radius must be positive")
        return cls("disc", [float(R)])

    @classmethod
    def conformal(cls, coeffs):
        return cls("conformal", coeffs)

    # descriptors ----------------------------------------------------------
    @property
    def is_disc(self):
        return self.kind in ("unit_disc", "disc")

    def describe(self):
        if self.kind == "unit_disc":
            return {"kind": "unit_disc"}
        if self.kind == "disc":
            return {"kind": "disc", "radius": self.radius}
        return {"kind": "conformal",
                "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    def __eq__(self, other):
        return (isinstance(other, PlanarDomain) and self.kind == other.kind
                and np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.kind, tuple(self.coeffs)))

    def __repr__(self):
        return f"PlanarDomain({self.describe()})"

    # the map --------------------------------------------------------------
    def f(self, zeta):
        return self._f(np.asarray(zeta, dtype=complex))

    def df(self, zeta):
        return self._df(np.asarray(zeta, dtype=complex))

    def _validate_univalent(self):
        crit = self._df.roots()
        if crit.size and np.min(np.abs(crit)) <= 1.0 + 1e-9:
            raise ConstructionError("f' vanishes on the closed unit disc")
        pts = self.f(np.exp(2j * np.pi * np.arange(2048) / 2048))
        if not shapely.LinearRing(np.column_stack([pts.real, pts.imag])).is_simple:
            raise ConstructionError("boundary curve self-intersects (f not injective)")

    def invert(self, z, max_iter=60, fallback=True):
        """Solve ``f(ζ) = z`` for the preimage in the closed unit disc.

        Damped Newton from the nearest point of a coarse seed grid, tolerance
        ``1e-12`` in ζ.  When Newton lands outside the unit disc (a polynomial
        may have other preimages there) or stalls, all roots of ``f − z`` are
        computed and the one of smallest modulus is taken.

        Raises
        ------
        IndeterminateMembership
            If no root is certified.
        """
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        if self.is_disc:
            return (z / self.coeffs[0]).reshape(shape)
        seeds = (_SEED_RADII[:, None] * np.exp(1j * _SEED_ANGLES)[None, :]).ravel()
        fs = self.f(seeds)
        zeta = np.empty_like(z)
        for lo in range(0, z.size, 4096):
            blk = z[lo:lo + 4096]
            zeta[lo:lo + 4096] = seeds[np.argmin(np.abs(fs[None, :] - blk[:, None]), axis=1)]
        ok = np.zeros(z.size, bool)
        for _ in range(max_iter):
            act = ~ok
            if not act.any():
                break
            zc = zeta[act]
            res = self.f(zc) - z[act]
            d = self.df(zc)
            step = np.where(d != 0, res / np.where(d == 0, 1, d), 0.0)
            lam = np.ones(zc.size)
            base = np.abs(res)
            new = zc - step
            for _ in range(30):
                worse = np.abs(self.f(new) - z[act]) > base
                if not worse.any():
                    break
                lam[worse] *= 0.5
                new = np.where(worse, zc - lam * step, new)
            zeta[act] = new
            done = np.abs(lam * step) <= NEWTON_TOL * np.maximum(1.0, np.abs(new))
            idx = np.nonzero(act)[0]
            ok[idx[done]] = True
        check = ~ok | (np.abs(zeta) >= 1.0 - 1e-12)
        if check.any():
            if not fallback:
                k = int(np.nonzero(check)[0][0])
                raise IndeterminateMembership(complex(z[k]))
            for k in np.nonzero(check)[0]:
                coef = self._f.coef.copy()
                coef[0] -= z[k]
                roots = np.polynomial.Polynomial(coef).roots()
                r = roots[np.argmin(np.abs(roots))]
                if abs(self.f(r) - z[k]) > 1e-8 * max(1.0, abs(z[k])):
                    raise IndeterminateMembership(complex(z[k]))
                zeta[k] = r
        return zeta.reshape(shape)

    # geometry -------------------------------------------------------------
    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        if self.is_disc:
            return np.abs(z) < self.radius
        inside = np.zeros(z.shape, bool)
        # cheap rejection outside the bounding circle
        cand = np.abs(z) < self.bounding_radius * (1 + 1e-12)
        if cand.any():
            inside[cand] = np.abs(self.invert(z[cand])) < 1.0
        return inside

    def green(self, z):
        z = np.asarray(z, dtype=complex)
        if not np.all(self.contains(z)):
            raise DomainError("green: point outside the domain")
        zeta = self.invert(z)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(zeta) ** 2)

    def shift(self, z):
        z = np.asarray(z, dtype=complex)
        if not np.all(self.contains(z)):
            raise DomainError("shift: point outside the domain")
        if self.is_disc:
            return np.full(z.shape, 2 * np.log(self.radius))
        # B = log|f(ζ)/ζ|², evaluated without cancellation through f(ζ)/ζ
        return np.log(np.abs(self._q(self.invert(z))) ** 2)

    @property
    def shift0(self):
        """Analytic B(0) = log|c₁|²."""
        return float(np.log(abs(self.coeffs[0]) ** 2))

    def optimal_constant(self):
        return float(np.pi * np.exp(self.shift0))

    def boundary_sample(self, n):
        if n < 3:
            raise DomainError("boundary_sample needs n >= 3")
        return self.f(np.exp(2j * np.pi * np.arange(n) / n))

    @property
    def bounding_radius(self):
        return self._rbox

    @property
    def inradius(self):
        """Distance from 0 to the boundary."""
        if self.is_disc:
            return self.radius
        return float(self.distance_to_boundary(0.0))

    def distance_to_boundary(self, z):
        z = np.asarray(z, dtype=complex)
        if self.is_disc:
            return np.abs(self.radius - np.abs(z))
        pts = shapely.points(z.real.ravel(), z.imag.ravel())
        return shapely.distance(self._ring, pts).reshape(z.shape)

    def nearest_boundary(self, z):
        """Closest boundary point (radial projection for discs)."""
        z = np.asarray(z, dtype=complex)
        if self.is_disc:
            r = np.abs(z)
            u = np.where(r > 0, z / np.where(r > 0, r, 1), 1.0)
            return self.radius * u
        pts = shapely.points(z.real.ravel(), z.imag.ravel())
        p = shapely.line_interpolate_point(self._ring, shapely.line_locate_point(self._ring, pts))
        return (shapely.get_x(p) + 1j * shapely.get_y(p)).reshape(z.shape)

    def segment_exit(self, z0, d, smax):
        """Smallest ``s ∈ (0, smax]`` with ``z0 + s·d`` on the boundary.

        ``z0`` must be inside; returns ``smax`` where the segment stays inside.
        """
        z0 = np.asarray(z0, dtype=complex)
        d = np.broadcast_to(np.asarray(d, dtype=complex), z0.shape)
        if self.is_disc:
            b = np.real(np.conj(z0) * d)
            a = np.abs(d) ** 2
            c = np.abs(z0) ** 2 - self.radius ** 2
            s = (-b + np.sqrt(b * b - a * c)) / a
            return np.minimum(s, smax)
        lo = np.zeros(z0.shape)
        hi = np.full(z0.shape, float(smax))
        out = ~self.contains(z0 + hi * d)
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            ins = self.contains(z0 + mid * d)
            lo = np.where(ins, mid, lo)
            hi = np.where(ins, hi, mid)
        return np.where(out, 0.5 * (lo + hi), smax)


# functional aliases ------------------------------------------------------

def UnitDisc():
    return PlanarDomain.unit_disc()


def Disc(R):
    return PlanarDomain.disc(R)


def ConformalImage(coeffs):
    return PlanarDomain.conformal(coeffs)


def contains(domain, z):
    out = domain.contains(z)
    return bool(out) if np.ndim(out) == 0 else out


def green(domain, z):
    out = domain.green(z)
    return float(out) if np.ndim(out) == 0 else out


def shift(domain, z):
    out = domain.shift(z)
    return float(out) if np.ndim(out) == 0 else out


def optimal_constant(domain):
    return domain.optimal_constant()


def boundary_sample(domain, n):
    return domain.boundary_sample(n)


def domain_from_config(cfg):
    """Build a domain from a config block ``{kind, radius | coeffs}``."""
    kind = cfg.get("kind")
    if kind == "unit_disc":
        return UnitDisc()
    if kind == "disc":
        return Disc(float(cfg["radius"]))
    if kind == "conformal":
        raw = cfg["coeffs"]
        return ConformalImage([complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                               for c in raw])
    raise ConstructionError(f"unknown domain kind {kind!r}")
