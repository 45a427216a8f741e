"""Hartogs lifts of planar weights and Green-type certificates.

The lift of a weight φ on Ω is ``{(z, w) : z ∈ Ω, |w|² < e^{−φ(z)}}``.  A
Green-type certificate is a negative plurisubharmonic ``G̃`` on the lift with

    log|z|² + Ã(z, w)  ≥  G̃(z, w)  ≥  log|z|² − B̃(z, w)

for continuous ``Ã, B̃``; the associated extension constant is
``∫_{|w|<1} e^{B̃(0, w)} dλ(w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as qd
from .errors import ConstructionError, NumericError, UnsupportedError
from .radial_weights import RadialWeight, psi, psi_t

LEVI_STEP = 1e-4
LEVI_COLLAR = 0.05


def complex_directions(n=13):
    """Quasi-uniform unit vectors ``(a, b)`` in ℂ² modulo phase.

    Points of the projective line correspond to points of the 2-sphere; we
    take both poles (the pure ``z`` and pure ``w`` directions) plus a
    Fibonacci spiral of ``n − 2`` points and map them back by
    ``[cos(θ/2) : sin(θ/2) e^{iϕ}]``.
    """
    if n < 2:
        raise ConstructionError("need at least two directions")
    m = n - 2
    k = np.arange(m)
    cz = 1 - 2 * (k + 0.5) / max(m, 1)
    theta = np.arccos(cz)
    azim = np.pi * (3 - np.sqrt(5)) * k
    a = np.concatenate([[1.0, 0.0], np.cos(theta / 2)]).astype(complex)
    b = np.concatenate([[0.0, 1.0], np.sin(theta / 2) * np.exp(1j * azim)])
    return a[:n], b[:n]


class HartogsDomain:
    """The set ``{(z, w) : z ∈ Ω, |w|² < e^{−φ(z)}}``."""

    def __init__(self, base, weight):
        if weight.domain != base:
            raise ConstructionError("weight is defined on a different domain")
        phi0 = float(np.asarray(weight.phi(0.0)))
        if abs(phi0) > 1e-12:
            raise ConstructionError(f"weight must vanish at 0 (got {phi0:.3e})")
        self.base = base
        self.weight = weight

    def fiber_top(self, z):
        """``−φ(z)``: the supremum of ``t = log|w|²`` over the fiber."""
        return -self.weight.phi(z)

    def contains(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        z, w = np.broadcast_arrays(z, w)
        out = np.array(self.base.contains(z), dtype=bool)
        if out.any():
            out[out] = np.abs(w[out]) ** 2 < np.exp(-self.weight.phi(z[out]))
        return out

    def contains_t(self, z, t):
        """Membership in the reduced coordinates ``(z, t = log|w|²)``."""
        z = np.asarray(z, dtype=complex)
        t = np.asarray(t, dtype=float)
        z, t = np.broadcast_arrays(z, t)
        out = np.array(self.base.contains(z), dtype=bool)
        if out.any():
            out[out] = t[out] < -self.weight.phi(z[out])
        return out

    def describe(self):
        return {"base": self.base.describe(), "weight": self.weight.describe()}


def build(base, weight):
    return HartogsDomain(base, weight)


def boundary_kind(hd, z, w, tol=1e-9):
    """Classify a point as ``Graph``, ``Vertical``, ``Corner`` or ``NotBoundary``."""
    z = complex(z)
    w2 = abs(complex(w)) ** 2
    inside = bool(hd.base.contains(z))
    on_wall = float(hd.base.distance_to_boundary(z)) <= tol
    if inside:
        top = math.exp(-float(hd.weight.phi(z)))
    elif on_wall:
        # fiber radius on the wall taken as the limit from inside
        zi = complex(hd.base.nearest_boundary(z)) * (1 - 1e-9)
        top = math.exp(-float(hd.weight.phi(zi))) if hd.base.contains(zi) else 0.0
    else:
        return "NotBoundary"
    graph = abs(w2 - top) <= tol
    vertical = on_wall and w2 <= top + tol
    if graph and vertical:
        return "Corner"
    if graph:
        return "Graph"
    if vertical:
        return "Vertical"
    return "NotBoundary"


@dataclass
class LeviReport:
    min_eig: float
    samples: int
    step: float
    collar: float
    normalization: str = "tangent vector (1, -w phi_z)"

    def to_dict(self):
        return dict(self.__dict__)


def levi_sample(hd, n=200, seed=0, step=LEVI_STEP, collar=LEVI_COLLAR):
    """Minimum Levi form of ``ρ = log|w|² + φ(z)`` over graph boundary points.

    On the graph the complex tangent direction is ``(1, −w φ_z)``; with that
    parametrization the Levi form equals ``φ_{zz̄}``, evaluated here by the
    five-point Laplacian with step ``step``.  Points within ``collar`` of the
    vertical wall are excluded (the corner circle is not smooth).
    """
    w = hd.weight
    if not getattr(w, "smooth", False):
        raise UnsupportedError("Levi sampling needs a smooth (parametric) weight")
    z = _uniform_in_domain(hd.base, n, np.random.default_rng(seed),
                           min_dist=collar)
    phi = w.phi
    lap = (phi(z + step) + phi(z - step) + phi(z + 1j * step) + phi(z - 1j * step)
           - 4 * phi(z)) / (4 * step ** 2)
    return LeviReport(float(np.min(lap)), int(n), step, collar)


def _uniform_in_domain(dom, n, rng, min_dist=0.0, radius=None):
    R = dom.bounding_radius if radius is None else radius
    out = []
    have = 0
    while have < n:
        m = max(2 * (n - have), 64)
        z = rng.uniform(-R, R, m) + 1j * rng.uniform(-R, R, m)
        if radius is not None:
            z = z[np.abs(z) < radius]
        z = z[dom.contains(z)]
        if min_dist > 0:
            z = z[dom.distance_to_boundary(z) > min_dist]
        out.append(z)
        have += z.size
    return np.concatenate(out)[:n]


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class GreenTypeCertificate:
    """Callables ``G̃, Ã, B̃`` of ``(z, w)`` plus provenance."""

    g_tilde: object
    a_tilde: object
    b_tilde: object
    provenance: str
    meta: dict = field(default_factory=dict)
    # B̃(0, w) as a function of t = log|w|², when a fast path exists
    b0_t: object = None
    # kinks of t ↦ B̃(0, t), handed to the quadrature as breakpoints
    kinks: tuple = ()

    @classmethod
    def radial(cls, profile):
        def a(z, w):
            return np.broadcast_to(psi(profile, w), np.broadcast(z, w).shape)

        def g(z, w):
            z = np.asarray(z, dtype=complex)
            with np.errstate(divide="ignore"):
                return np.log(np.abs(z) ** 2) + a(z, w)

        return cls(g, a, lambda z, w: -a(z, w), "RadialClosedForm",
                   {"profile": profile.describe()},
                   b0_t=lambda t: -psi_t(profile, t))

    @classmethod
    def pullback(cls, domain):
        def b(z, w):
            z = np.asarray(z, dtype=complex)
            shape = np.broadcast(z, w).shape
            zz = np.broadcast_to(z, shape)
            out = np.empty(shape)
            small = np.abs(zz) == 0
            out[small] = domain.shift0
            if (~small).any():
                out[~small] = domain.shift(zz[~small])
            return out

        def g(z, w):
            z = np.asarray(z, dtype=complex)
            shape = np.broadcast(z, w).shape
            zz = np.broadcast_to(z, shape)
            with np.errstate(divide="ignore"):
                return domain.green(zz)

        # Ã = −B makes the upper sandwich an equality as well: G = log|z|² − B
        return cls(g, lambda z, w: -b(z, w), b, "Pullback", {"domain": domain.describe()},
                   b0_t=lambda t: np.full(np.shape(t), domain.shift0))

    @classmethod
    def constant(cls, value):
        """A deliberately invalid certificate ``G̃ ≡ value`` (for tests)."""
        def g(z, w):
            return np.full(np.broadcast(z, w).shape, float(value))
        zero = lambda z, w: np.zeros(np.broadcast(z, w).shape)
        return cls(g, zero, zero, "Constant", {"value": float(value)})

    @classmethod
    def from_envelope(cls, sol):
        """``Ã = ũ``, ``B̃ = −ũ``, ``G̃ = log|z|² + ũ`` from an envelope solution."""
        def a(z, w):
            z, w = np.broadcast_arrays(np.asarray(z, complex), np.asarray(w, complex))
            with np.errstate(divide="ignore"):
                return sol.evaluate(z, np.log(np.abs(w) ** 2))

        def g(z, w):
            z = np.asarray(z, dtype=complex)
            with np.errstate(divide="ignore"):
                return np.log(np.abs(z) ** 2) + a(z, w)

        if sol.legendre is not None:
            from .envelope.legendre import envelope_integral
            L = sol.legendre
            m = sol.grid.origin
            _, bps, _ = envelope_integral(L.H[:, L.op.index[m[0], m[1]]], L.s, 0.0)
            kinks = tuple(float(b) for b in bps)
        else:
            kinks = tuple(float(t) for t in sol.grid.t)
        return cls(g, a, lambda z, w: -a(z, w), "MASolution",
                   {"boundary": sol.bd.describe()},
                   b0_t=lambda t: -sol.evaluate(np.zeros(np.shape(t), complex), t),
                   kinks=kinks)


def certificate_constant(cert, quad=None):
    """``∫_{|w|<1} e^{B̃(0,w)} dλ(w) = π ∫_{−∞}^0 e^{B̃(0, t) + t} dt``."""
    quad = quad or qd.AdaptiveRadial()

    if cert.b0_t is not None:
        def f(t):
            return math.exp(float(np.asarray(cert.b0_t(np.array([t])))[0]) + t)
    else:
        def f(t):
            w = np.array([math.exp(t / 2)], dtype=complex)
            return math.exp(float(cert.b_tilde(np.zeros(1, complex), w)[0]) + t)

    pts = list(cert.kinks) or None
    limit = 500 + 4 * len(cert.kinks)
    est, _ = qd.integrate_1d(f, -40.0, 0.0, epsabs=quad.target_err * 1e-2,
                             epsrel=quad.target_err, points=pts, limit=limit,
                             what="certificate constant")
    t_cut = min(-40.0, math.log(1e-14 * max(est, 1e-300)))
    val, _ = qd.integrate_1d(f, t_cut, 0.0, epsabs=quad.target_err * 1e-2,
                             epsrel=quad.target_err, points=pts, limit=limit,
                             what="certificate constant")
    return float(np.pi * val)


@dataclass
class CertificateReport:
    ok: bool
    negativity_ok: bool
    upper_ok: bool
    lower_ok: bool
    continuity_ok: bool
    psh_ok: bool
    max_g: float
    upper_margin: float
    lower_margin: float
    psh_violation: float
    r0: float
    samples: int
    psh_circles: int
    provenance: str

    def to_dict(self):
        return dict(self.__dict__)


def sample_lift(hd, n, rng, radius=None):
    """Random points of the lift: ``z`` uniform in Ω, ``w`` uniform in its fiber."""
    z = _uniform_in_domain(hd.base, n, rng, radius=radius)
    rmax = np.exp(-hd.weight.phi(z) / 2)
    w = rmax * np.sqrt(rng.uniform(0, 1, z.size)) * np.exp(2j * np.pi * rng.uniform(0, 1, z.size))
    keep = hd.contains(z, w)
    return z[keep], w[keep]


def verify_certificate(cert, hd, n=2000, seed=0, tol=1e-9, psh_tol=1e-9,
                       psh_points=200, radius=1e-2, n_dirs=13):
    """Sampled verification of the Green-type conditions.

    Checks negativity of ``G̃``, the upper sandwich on all samples, the lower
    sandwich on the band ``|z| < r₀`` with ``r₀ = 0.1 × inradius``, finiteness
    of ``Ã, B̃`` and the sub-mean-value inequality of ``G̃`` on 16-point circles
    along ``n_dirs`` complex lines (circles leaving the lift are skipped).
    Violations are flagged, not raised.
    """
    rng = np.random.default_rng(seed)
    z1, w1 = sample_lift(hd, n, rng)
    r0 = 0.1 * hd.base.inradius
    z2, w2 = sample_lift(hd, max(n // 4, 1), rng, radius=r0)
    z = np.concatenate([z1, z2])
    w = np.concatenate([w1, w2])
    with np.errstate(divide="ignore", invalid="ignore"):
        G = np.asarray(cert.g_tilde(z, w), dtype=float)
        A = np.asarray(cert.a_tilde(z, w), dtype=float)
        B = np.asarray(cert.b_tilde(z, w), dtype=float)
        L = np.log(np.abs(z) ** 2)
    if np.any(np.isnan(G)):
        raise NumericError("certificate evaluation produced NaN")
    continuity_ok = bool(np.all(np.isfinite(A)) and np.all(np.isfinite(B)))
    max_g = float(np.max(G))
    upper = float(np.min(L + A - G))
    band = np.abs(z) < r0
    lower = float(np.min(G[band] - (L[band] - B[band]))) if band.any() else float("nan")

    # sub-mean-value along complex lines
    a, b = complex_directions(n_dirs)
    circ = radius * np.exp(2j * np.pi * np.arange(16) / 16)
    k = min(psh_points, z.size)
    zc, wc, gc = z[:k], w[:k], G[:k]
    worst = -np.inf
    used = 0
    for ad, bd in zip(a, b):
        zz = zc[:, None] + ad * circ[None, :]
        ww = wc[:, None] + bd * circ[None, :]
        inside = hd.contains(zz, ww).all(axis=1)
        # a 16-point average of log|z|² under-reads the true mean when the
        # circle passes close to the pole, so keep the circles well away from it
        inside &= np.abs(zc) > 4 * radius * abs(ad)
        if not inside.any():
            continue
        with np.errstate(divide="ignore"):
            vals = np.asarray(cert.g_tilde(zz[inside], ww[inside]), dtype=float)
        viol = gc[inside] - vals.mean(axis=1)
        worst = max(worst, float(np.max(viol)))
        used += int(inside.sum())
    psh_violation = worst if used else float("nan")

    neg_ok = max_g < 0
    upper_ok = upper >= -tol
    lower_ok = bool(np.isnan(lower) or lower >= -tol)
    psh_ok = bool(used == 0 or psh_violation <= psh_tol)
    ok = neg_ok and upper_ok and lower_ok and continuity_ok and psh_ok
    return CertificateReport(bool(ok), bool(neg_ok), bool(upper_ok), lower_ok, continuity_ok,
                             psh_ok, max_g, upper, lower, psh_violation, r0, int(z.size),
                             used, cert.provenance)
