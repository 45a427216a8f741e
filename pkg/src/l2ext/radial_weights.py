"""Radial profiles, weight fields, the fiber function ψ and radial constants.

A radial weight is ``φ(z) = u(log|z|²)`` with ``u`` convex, strictly
increasing on ``t < 0``, ``u(−∞) = 0`` and ``u(0⁻) = +∞``.  Its fiber function
``ψ(w) = −u⁻¹(−log|w|²)`` gives the explicit Green-type function
``log|z|² + ψ(w)`` on the Hartogs lift, and the two integrals

    2π ∫₀¹ e^{−u(log r²)} r dr   and   2π ∫₀¹ e^{u⁻¹(−log r²)} r dr

agree.  Both are evaluated here by separate adaptive quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import quadrature as qd
from .errors import (ConstructionError, DomainError, PreconditionError,
                     UnsupportedError)
from .planar_domain import PlanarDomain


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

class RadialProfile:
    """Base class; subclasses provide ``_u`` (vectorized) and ``_uinv``."""

    kind = "abstract"

    def u(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t >= 0):
            raise DomainError("u is defined for t < 0 only")
        with np.errstate(over="ignore", divide="ignore"):
            return self._u(t)

    def u_inv(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(~(s > 0)):
            raise DomainError("u^{-1} is defined for s > 0 only")
        return self._uinv(s)

    def _uinv(self, s):
        return np.vectorize(self._bisect, otypes=[float])(s)

    def _bisect(self, s):
        # bracket the root of u(t) = s, then refine with brentq
        u = lambda t: float(self._u(np.array(t)))
        lo, hi = -1.0, -1.0
        for _ in range(200):
            if u(lo) < s:
                break
            lo *= 2.0
        else:
            raise PreconditionError("u^{-1}: cannot bracket from below", s)
        while u(hi) <= s:
            if hi > -1e-300:
                # the root is closer to 0 than doubles resolve; ψ is 0 to
                # working precision there
                return hi
            hi *= 0.5
        if not (u(lo) < s < u(hi)):
            raise PreconditionError("u^{-1}: bracket lost (profile not monotone?)", s)
        return optimize.brentq(lambda t: u(t) - s, lo, hi, xtol=1e-300, rtol=1e-14,
                               maxiter=2000)

    def breakpoints(self):
        """Points in t where the profile is not smooth (for quadrature)."""
        return ()

    def describe(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


class Power(RadialProfile):
    """``u(t) = a (−t)^{−p}``; ``a = 1`` gives the plain power family."""

    kind = "power"

    def __init__(self, p, a=1.0):
        if not (np.isfinite(p) and p > 0 and np.isfinite(a) and a > 0):
            raise ConstructionError("power profile needs p > 0 and a > 0")
        self.p = float(p)
        self.a = float(a)

    def _u(self, t):
        return self.a * (-t) ** (-self.p)

    def _uinv(self, s):
        return -((s / self.a) ** (-1.0 / self.p))

    def legendre_min(self, s, t_hi):
        """``min_{t ≤ t_hi} ψ(t) − s t`` in closed form, ``ψ(t) = −u⁻¹(−t)``.

        ψ(t) = a^{1/p} (−t)^{−1/p}; the stationary point solves ψ'(t) = s.
        """
        s = np.asarray(s, dtype=float)
        t_hi = np.asarray(t_hi, dtype=float)
        c = self.a ** (1.0 / self.p)
        k = 1.0 / self.p
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            tstar = -((s / (c * k)) ** (-1.0 / (k + 1.0)))
            at_star = c * (-tstar) ** (-k) - s * tstar
            t_end = np.minimum(t_hi, -1e-300)
            at_end = c * (-t_end) ** (-k) - s * t_end
            out = np.where(tstar <= t_hi, at_star, at_end)
            out = np.where(s <= 0, 0.0, out)
        return out

    def describe(self):
        if self.a == 1.0:
            return {"family": "power", "p": self.p}
        return {"family": "scaled", "a": self.a, "p": self.p}


def Scaled(a, p):
    return Power(p, a=a)


class Sampled(RadialProfile):
    """Piecewise-linear profile through knots with power-type tails.

    Knot slopes must be positive and strictly increasing (convex, increasing
    data); violations raise instead of being repaired.  Beyond the first knot
    the profile is ``u₁ ((−t₁)/(−t))^q`` and beyond the last knot it is
    ``uₙ ((−tₙ)/(−t))^r``, with ``q`` and ``r`` chosen so the slopes match the
    adjacent segment.  Both tails are convex, keep ``u(−∞) = 0`` and
    ``u(0⁻) = +∞``, and their exponents are kept in ``tails``.
    """

    kind = "sampled"

    def __init__(self, knots):
        k = np.asarray(knots, dtype=float)
        if k.ndim != 2 or k.shape[1] != 2 or k.shape[0] < 2:
            raise ConstructionError("knots must be a list of at least two (t, u) pairs")
        t, u = k[:, 0], k[:, 1]
        if np.any(t >= 0) or np.any(np.diff(t) <= 0) or np.any(u <= 0):
            raise ConstructionError("knots need increasing t < 0 and u > 0")
        m = np.diff(u) / np.diff(t)
        if np.any(m <= 0):
            raise ConstructionError("knot data not strictly increasing")
        if np.any(np.diff(m) <= 0):
            raise ConstructionError("knot data not convex")
        q = m[0] * (-t[0]) / u[0]
        r = m[-1] * (-t[-1]) / u[-1]
        if r <= 0 or q <= 0:
            raise ConstructionError("tail exponents must be positive")
        # the left tail must sit below the first segment's slope at t₁ and the
        # right tail above the last one; both hold by slope matching + convexity
        self.t, self.uk, self.m = t, u, m
        self.tails = {"left_exponent": float(q), "right_exponent": float(r)}

    def _u(self, t):
        t1, tn = self.t[0], self.t[-1]
        out = np.interp(t, self.t, self.uk)
        left = t < t1
        right = t > tn
        q, r = self.tails["left_exponent"], self.tails["right_exponent"]
        out = np.where(left, self.uk[0] * ((-t1) / np.where(left, -t, 1.0)) ** q, out)
        out = np.where(right, self.uk[-1] * ((-tn) / np.where(right, -t, 1.0)) ** r, out)
        return out

    def _uinv(self, s):
        t1, tn = self.t[0], self.t[-1]
        q, r = self.tails["left_exponent"], self.tails["right_exponent"]
        out = np.interp(s, self.uk, self.t)
        lo = s < self.uk[0]
        hi = s > self.uk[-1]
        out = np.where(lo, -(-t1) * (self.uk[0] / np.where(lo, s, 1.0)) ** (1 / q), out)
        out = np.where(hi, -(-tn) * (self.uk[-1] / np.where(hi, s, 1.0)) ** (1 / r), out)
        return out

    def breakpoints(self):
        return tuple(self.t)

    def describe(self):
        return {"family": "sampled", "knots": [[float(a), float(b)] for a, b in
                                                zip(self.t, self.uk)],
                "tails": dict(self.tails)}

    @classmethod
    def from_profile(cls, profile, ts):
        ts = np.asarray(ts, dtype=float)
        return cls(np.column_stack([ts, profile.u(ts)]))


class Regularized(RadialProfile):
    """``u_ε(t) = u(t) − ε log(1 − eᵗ)``; ``base=None`` stands for ``u ≡ 0``."""

    kind = "regularized"

    def __init__(self, base, eps):
        if not (np.isfinite(eps) and eps > 0):
            raise ConstructionError("regularization needs eps > 0")
        self.base = base
        self.eps = float(eps)

    def _u(self, t):
        with np.errstate(divide="ignore"):
            reg = -self.eps * np.log(-np.expm1(t))
        if self.base is None:
            return reg
        return self.base._u(t) + reg

    def breakpoints(self):
        return () if self.base is None else self.base.breakpoints()

    def describe(self):
        return {"family": "regularized", "eps": self.eps,
                "base": None if self.base is None else self.base.describe()}


def profile_from_config(cfg):
    fam = cfg.get("family")
    if fam == "power":
        return Power(float(cfg["p"]))
    if fam == "scaled":
        return Scaled(float(cfg["a"]), float(cfg["p"]))
    if fam == "sampled":
        return Sampled(cfg["knots"])
    if fam == "regularized":
        base = cfg.get("base")
        return Regularized(None if base is None else profile_from_config(base),
                           float(cfg["eps"]))
    raise ConstructionError(f"unknown profile family {fam!r}")


def check_profile(profile, n=4000, t_lo=-60.0, t_hi=-1e-4):
    """Sampled shape check: positive, increasing, convex divided differences.

    Returns the smallest first and second divided differences (relative),
    raising ``PreconditionError`` on a violation.
    """
    t = -np.geomspace(-t_lo, -t_hi, n)
    u = profile.u(t)
    d1 = np.diff(u) / np.diff(t)
    d2 = np.diff(d1)
    tol = 1e-9 * np.maximum(np.abs(d1[1:]), 1e-300)
    if np.any(u < 0) or np.any(d1 <= 0):
        raise PreconditionError("profile not strictly increasing", float(t[np.argmin(d1)]))
    if np.any(d2 < -tol):
        raise PreconditionError("profile not convex", float(t[1 + np.argmin(d2)]))
    return float(d1.min()), float((d2 / np.abs(d1[1:])).min())


def eval_u(profile, t):
    out = profile.u(t)
    return float(out) if np.ndim(out) == 0 else out


def eval_u_inverse(profile, s):
    out = profile.u_inv(s)
    return float(out) if np.ndim(out) == 0 else out


def psi_t(profile, t):
    """Fiber function in the variable ``t = log|w|²`` (``t < 0``)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    fin = np.isfinite(t)
    if np.any(t[fin] >= 0):
        raise DomainError("psi is defined for |w| < 1 only")
    if fin.any():
        out[fin] = -profile.u_inv(-t[fin])
    return out


def psi(profile, w):
    """``ψ(w) = −u⁻¹(−log|w|²)``; ``ψ(0) = 0``."""
    w = np.asarray(w, dtype=complex)
    r2 = np.abs(w) ** 2
    if np.any(r2 >= 1):
        raise DomainError("psi is defined for |w| < 1 only")
    with np.errstate(divide="ignore"):
        out = psi_t(profile, np.log(r2))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# weight fields
# ---------------------------------------------------------------------------

class WeightField:
    """A subharmonic weight φ on a planar domain with φ(0) = 0."""

    kind = "abstract"
    smooth = False
    is_radial = False

    def __init__(self, domain):
        self.domain = domain

    def __call__(self, z):
        return self.phi(z)

    def phi(self, z):
        raise NotImplementedError

    def describe(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


class RadialWeight(WeightField):
    """``φ(z) = u(log|z|²)`` on the unit disc; ``+∞`` on and beyond ``|z| = 1``."""

    kind = "radial"
    is_radial = True

    def __init__(self, profile):
        super().__init__(PlanarDomain.unit_disc())
        self.profile = profile

    def phi(self, z):
        r2 = np.abs(np.asarray(z, dtype=complex)) ** 2
        out = np.full(r2.shape, np.inf)
        inside = (r2 < 1) & (r2 > 0)
        if inside.any():
            with np.errstate(over="ignore"):
                out[inside] = self.profile.u(np.log(r2[inside]))
        out[r2 == 0] = 0.0
        return out

    def describe(self):
        return {"kind": "radial", "profile": self.profile.describe()}


@dataclass(frozen=True)
class _Family:
    name: str
    params: tuple


class ParametricWeight(WeightField):
    """Smooth weights from named families.

    ``zero``           φ ≡ 0
    ``quadratic``      α|z − a|² − α|a|²            (α ≥ 0)
    ``exp_harmonic``   α (e^{Re(b z)} − 1)          (α ≥ 0)
    """

    kind = "parametric"
    smooth = True

    def __init__(self, family, domain=None, **params):
        super().__init__(domain if domain is not None else PlanarDomain.unit_disc())
        self.family = family
        if family == "zero":
            self.params = {}
        elif family == "quadratic":
            self.params = {"alpha": float(params.get("alpha", 1.0)),
                           "center": complex(params.get("center", 0.0))}
        elif family == "exp_harmonic":
            self.params = {"alpha": float(params.get("alpha", 1.0)),
                           "b": complex(params.get("b", 1.0))}
        else:
            raise ConstructionError(f"unknown weight family {family!r}")
        if self.params.get("alpha", 0.0) < 0:
            raise ConstructionError("alpha must be nonnegative (subharmonicity)")

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        p = self.params
        if self.family == "zero":
            return np.zeros(z.shape)
        if self.family == "quadratic":
            a = p["center"]
            return p["alpha"] * (np.abs(z - a) ** 2 - abs(a) ** 2)
        return p["alpha"] * np.expm1(np.real(p["b"] * z))

    def laplacian_quarter(self, z):
        """Exact ``φ_{zz̄} = Δφ/4`` (used as a test oracle)."""
        z = np.asarray(z, dtype=complex)
        p = self.params
        if self.family == "zero":
            return np.zeros(z.shape)
        if self.family == "quadratic":
            return np.full(z.shape, p["alpha"])
        return p["alpha"] * abs(p["b"]) ** 2 / 4 * np.exp(np.real(p["b"] * z))

    def describe(self):
        out = {"kind": "parametric", "family": self.family, "domain": self.domain.describe()}
        for k, v in self.params.items():
            out[k] = [v.real, v.imag] if isinstance(v, complex) else v
        return out


class RegularizedWeight(WeightField):
    """``φ(z) − ε log(1 − |z|²)`` for a non-radial base on the unit disc."""

    kind = "regularized"

    def __init__(self, base, eps):
        super().__init__(base.domain)
        self.base = base
        self.eps = float(eps)
        self.smooth = base.smooth

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        r2 = np.abs(z) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            reg = np.where(r2 < 1, -self.eps * np.log1p(-np.minimum(r2, 1.0)), np.inf)
        return self.base.phi(z) + reg

    def describe(self):
        return {"kind": "regularized", "eps": self.eps, "base": self.base.describe()}


def regularize(base, eps):
    """Add ``−ε log(1 − |z|²)`` to a weight on the unit disc.

    Radial bases (and the zero weight) return a ``RadialWeight`` with the
    profile ``u(t) − ε log(1 − eᵗ)``.
    """
    if not (np.isfinite(eps) and eps > 0):
        raise DomainError("eps must be positive")
    if base.domain.kind != "unit_disc":
        raise UnsupportedError("regularization is defined on the unit disc only")
    if isinstance(base, RadialWeight):
        return RadialWeight(Regularized(base.profile, eps))
    if isinstance(base, ParametricWeight) and base.family == "zero":
        return RadialWeight(Regularized(None, eps))
    return RegularizedWeight(base, eps)


def weight_from_config(cfg, domain):
    kind = cfg.get("kind")
    if kind == "radial":
        w = RadialWeight(profile_from_config(cfg["profile"]))
    elif kind == "parametric":
        params = dict(cfg.get("params", {}))
        for key in ("center", "b"):
            if isinstance(params.get(key), (list, tuple)):
                params[key] = complex(*params[key])
        w = ParametricWeight(cfg["family"], domain=domain, **params)
    elif kind == "regularized":
        w = regularize(weight_from_config(cfg["base"], domain), float(cfg["eps"]))
    else:
        raise ConstructionError(f"unknown weight kind {kind!r}")
    if w.domain != domain:
        raise ConstructionError("weight and domain do not match")
    return w


def check_subharmonic(weight, n=24, radius=1e-2, tol=1e-9, margin=0.05):
    """Discrete sub-mean-value check on a grid of interior points.

    Returns the worst value of ``φ(z) − mean over a 16-point circle``, which
    should be ``≤ tol``.
    """
    dom = weight.domain
    R = dom.bounding_radius
    xs = np.linspace(-R, R, n)
    z = (xs[None, :] + 1j * xs[:, None]).ravel()
    z = z[dom.contains(z)]
    z = z[dom.distance_to_boundary(z) > margin + radius]
    circ = radius * np.exp(2j * np.pi * np.arange(16) / 16)
    avg = weight.phi(z[:, None] + circ[None, :]).mean(axis=1)
    worst = float(np.max(weight.phi(z) - avg))
    return worst, bool(worst <= tol)


# ---------------------------------------------------------------------------
# radial identity and constants
# ---------------------------------------------------------------------------

def _lhs_integrand(profile):
    def f(r):
        if r <= 0.0:
            return 0.0
        t = 2.0 * math.log(r)
        if t >= 0.0:
            return 0.0
        return math.exp(-float(profile.u(np.array(t)))) * r
    return f


def _rhs_integrand(profile):
    def f(r):
        if r <= 0.0 or r >= 1.0:
            return 0.0
        s = -2.0 * math.log(r)
        return math.exp(float(profile.u_inv(np.array(s)))) * r
    return f


def prop31_check(profile, quad=None):
    """Both sides of the radial identity by separate adaptive quadratures.

    Returns
    -------
    lhs, rhs, rel_err : float
    """
    quad = quad or qd.AdaptiveRadial()
    eps = quad.target_err
    bp = profile.breakpoints()
    # kinks of u at t_k sit at r = e^{t_k/2} on the left, and kinks of u⁻¹ at
    # u_k sit at r = e^{−u_k/2} on the right
    pts_l = [math.exp(t / 2) for t in bp]
    pts_r = [math.exp(-float(profile.u(np.array(t))) / 2) for t in bp]
    lhs, _ = qd.integrate_1d(_lhs_integrand(profile), 0.0, 1.0, epsabs=eps * 1e-2,
                             epsrel=eps, points=pts_l, what="radial lhs")
    rhs, _ = qd.integrate_1d(_rhs_integrand(profile), 0.0, 1.0, epsabs=eps * 1e-2,
                             epsrel=eps, points=pts_r, what="radial rhs")
    lhs *= 2 * np.pi
    rhs *= 2 * np.pi
    return lhs, rhs, abs(lhs - rhs) / lhs


def sharper_constant_radial(profile, quad=None, return_info=False):
    """``∫_{|w|<1} e^{−ψ(w)} dλ = π ∫_{−∞}^0 e^{u⁻¹(−t)} eᵗ dt``.

    The integrand is bounded by ``eᵗ``; the lower tail is cut at ``t_cut``
    where ``e^{t_cut} < 1e−14 ×`` the running estimate, and that bound is
    reported as the truncation error.
    """
    quad = quad or qd.AdaptiveRadial()
    eps = quad.target_err

    def f(t):
        if t >= 0.0:
            return 0.0
        return math.exp(float(profile.u_inv(np.array(-t))) + t)

    pts = sorted(-float(profile.u(np.array(t))) for t in profile.breakpoints())
    est, _ = qd.integrate_1d(f, -40.0, 0.0, epsabs=eps * 1e-2, epsrel=eps, points=pts,
                             what="sharper constant")
    t_cut = min(-40.0, math.log(1e-14 * est))
    val, err = qd.integrate_1d(f, t_cut, 0.0, epsabs=eps * 1e-2, epsrel=eps,
                               points=pts, what="sharper constant")
    tail = math.exp(t_cut)
    S = np.pi * val
    if return_info:
        return S, {"t_cut": t_cut, "tail_bound": np.pi * tail, "quad_error": np.pi * err}
    return S


def weight_integral(weight, quad=None):
    """``∫_Ω e^{−φ} dλ`` for a radial weight by a direct radial quadrature."""
    if not weight.is_radial:
        raise UnsupportedError("weight_integral is implemented for radial weights")
    quad = quad or qd.AdaptiveRadial()
    prof = weight.profile
    pts = [math.exp(t / 2) for t in prof.breakpoints()]
    val, _ = qd.integrate_1d(_lhs_integrand(prof), 0.0, 1.0, epsabs=quad.target_err * 1e-2,
                             epsrel=quad.target_err, points=pts, what="weight integral")
    return 2 * np.pi * val


def green_type_radial(profile):
    """The explicit certificate ``G̃ = log|z|² + ψ(w)``, ``Ã = ψ``, ``B̃ = −ψ``."""
    from .hartogs import GreenTypeCertificate
    return GreenTypeCertificate.radial(profile)
