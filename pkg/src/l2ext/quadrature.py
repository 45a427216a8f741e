"""Quadrature helpers: adaptive 1D integration and disc node sets.

The 1D routine wraps QUADPACK (``scipy.integrate.quad``), whose globally
adaptive Gauss-Kronrod bisection is the embedded-rule scheme we want.  Disc
node sets are tensor products of a radial rule and the periodic trapezoid
rule in the angle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConstructionError, QuadratureFailure

ABS_TARGET = 1e-10
REL_TARGET = 1e-10


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature configuration.

    Parameters
    ----------
    scheme : {"polar_tensor", "adaptive_radial"}
        ``polar_tensor`` uses ``n_r`` Gauss-Legendre nodes in the radius;
        ``adaptive_radial`` refines Gauss-Legendre panels until the radial
        moments agree to ``target_err``.
    n_r, n_theta : int
        Node counts.  ``n_theta`` of 0 means "choose from the degree".
    target_err : float
        Relative target for adaptive schemes (also used by 1D integrals).
    """

    scheme: str = "adaptive_radial"
    n_r: int = 0
    n_theta: int = 0
    target_err: float = 1e-10

    def __post_init__(self):
        if self.scheme not in ("polar_tensor", "adaptive_radial"):
            raise ConstructionError(f"unknown quadrature scheme {self.scheme!r}")
        if self.scheme == "polar_tensor" and self.n_r < 1:
            raise ConstructionError("polar_tensor needs n_r >= 1")
        if self.n_theta < 0 or not (0 < self.target_err < 1):
            raise ConstructionError("invalid quadrature parameters")

    def to_dict(self):
        return {"scheme": self.scheme, "n_r": self.n_r, "n_theta": self.n_theta,
                "target_err": self.target_err}


def PolarTensor(n_r, n_theta=0):
    return QuadratureSpec("polar_tensor", n_r=n_r, n_theta=n_theta)


def AdaptiveRadial(target_err=1e-10, n_theta=0):
    return QuadratureSpec("adaptive_radial", target_err=target_err, n_theta=n_theta)


def integrate_1d(f, a, b, *, epsabs=ABS_TARGET, epsrel=REL_TARGET, points=None,
                 limit=500, what="integral"):
    """Adaptive integral of a scalar function, raising on failure.

    Returns
    -------
    value, error_estimate : float
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if points is not None and np.isfinite(a) and np.isfinite(b):
            pts = sorted(p for p in points if a < p < b)
            out = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
                                 points=pts or None, full_output=1)
        else:
            out = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
                                 full_output=1)
    value, err = out[0], out[1]
    # QUADPACK appends a message only when it stopped abnormally
    warned = len(out) > 3
    if not np.isfinite(value):
        raise QuadratureFailure(f"{what}: non-finite value", err)
    if warned and err > max(epsabs, epsrel * abs(value)) * 10:
        raise QuadratureFailure(f"{what}: adaptive quadrature did not converge", err)
    return float(value), float(err)


def gauss_legendre(n, a=0.0, b=1.0):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def adaptive_panels(fvec, a, b, tol, order=16, seeds=None, max_panels=4000):
    """Composite Gauss-Legendre nodes refined until a vector integral settles.

    ``fvec(x)`` maps an array of abscissae of shape (m,) to values of shape
    (m, k) with nonnegative entries.  A panel is accepted when its integral
    and the sum over its two halves agree to ``tol`` relative to the running
    total of each component.  Refinement is breadth-first in a fixed order,
    so the node set is deterministic.

    Returns
    -------
    nodes, weights : ndarray
    """
    edges = np.unique(np.concatenate([[a, b], [] if seeds is None else seeds]))
    edges = edges[(edges >= a) & (edges <= b)]
    xg, wg = np.polynomial.legendre.leggauss(order)

    def panel(lo, hi):
        x = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
        w = 0.5 * (hi - lo) * wg
        return x, w, w @ fvec(x)

    work = [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    done = []
    total = None
    while work:
        if len(done) + len(work) > max_panels:
            raise QuadratureFailure("adaptive panel refinement exceeded its budget",
                                    float("nan"))
        coarse = [panel(lo, hi) for lo, hi in work]
        est = sum(c[2] for c in coarse) + sum(d[2] for d in done)
        total = np.maximum(np.abs(est), 1e-300)
        nxt = []
        for (lo, hi), c in zip(work, coarse):
            mid = 0.5 * (lo + hi)
            left, right = panel(lo, mid), panel(mid, hi)
            diff = np.abs(c[2] - left[2] - right[2])
            if np.all(diff <= tol * total) or hi - lo < 1e-15 * max(1.0, abs(hi)):
                done.append(left)
                done.append(right)
            else:
                nxt += [(lo, mid), (mid, hi)]
        work = nxt
    done.sort(key=lambda p: p[0][0])
    nodes = np.concatenate([d[0] for d in done])
    weights = np.concatenate([d[1] for d in done])
    return nodes, weights


@dataclass
class DiscNodes:
    """Tensor nodes on the unit disc: radius nodes x angle nodes."""

    r: np.ndarray
    wr: np.ndarray
    theta: np.ndarray
    zeta: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)


def disc_nodes(r, wr, n_theta):
    """Combine radial nodes with the periodic trapezoid rule (area element r dr dθ)."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    zeta = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = ((wr * r)[:, None] * np.full(n_theta, 2 * np.pi / n_theta)[None, :]).ravel()
    if np.any(weights <= 0):
        raise ConstructionError("quadrature weights must be positive")
    return DiscNodes(r, wr, theta, zeta, weights)
