"""Least-norm holomorphic extension of the value 1 at the origin.

The minimal norm ``m = min {∫_Ω |f|² e^{−φ} : f(0) = 1}`` is approximated over
polynomials of degree ≤ N in the disc coordinate ζ (``z = F(ζ)``), so that

    ∫_Ω |f|² e^{−φ} dλ = ∫_Δ |f∘F|² e^{−φ∘F} |F'|² dλ.

The pulled-back weight ``W = e^{−φ∘F}|F'|²`` is integrated by tensor nodes
(radius × angle) on the unit disc.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import quadrature as qd
from .errors import ConstructionError, NonConvergence, NumericError

COND_SWITCH = 1e8


def _pulled_weight(domain, weight):
    def W(zeta):
        z = domain.f(zeta)
        with np.errstate(over="ignore"):
            return np.exp(-weight.phi(z)) * np.abs(domain.df(zeta)) ** 2
    return W


def _n_theta(quad, N, weight):
    if quad.n_theta:
        return quad.n_theta
    return 4 * N + 16 if weight.is_radial else max(64, 4 * N + 32)


def disc_quadrature(domain, weight, N, quad=None):
    """Nodes ζ and weights (including ``W``) for the pulled-back inner product."""
    quad = quad or qd.AdaptiveRadial(1e-12)
    if weight.domain != domain:
        raise ConstructionError("weight and domain do not match")
    W = _pulled_weight(domain, weight)
    nth = _n_theta(quad, N, weight)
    ang = np.exp(2j * np.pi * np.arange(nth) / nth)
    if quad.scheme == "polar_tensor":
        r, wr = qd.gauss_legendre(quad.n_r)
    else:
        j = np.arange(N + 1)

        def moments(x):
            mean_w = W(x[:, None] * ang[None, :]).mean(axis=1)
            return (x[:, None] ** (2 * j[None, :] + 1)) * mean_w[:, None]

        seeds = np.concatenate([2.0 ** -np.arange(1, 41), 1 - 2.0 ** -np.arange(1, 21)])
        r, wr = qd.adaptive_panels(moments, 0.0, 1.0, quad.target_err, seeds=seeds)
    nodes = qd.disc_nodes(r, wr, nth)
    wts = nodes.weights * W(nodes.zeta)
    if not np.all(np.isfinite(wts)):
        raise NumericError("non-finite quadrature weights")
    return nodes.zeta, wts


def gram(domain, weight, N, quad=None):
    """``M_{jk} = ∫ ζ^j conj(ζ)^k W dλ(ζ)`` for ``0 ≤ j, k ≤ N``."""
    if N < 0:
        raise ConstructionError("degree must be nonnegative")
    zeta, w = disc_quadrature(domain, weight, N, quad)
    V = zeta[:, None] ** np.arange(N + 1)[None, :]
    M = V.T @ (w[:, None] * V.conj())
    M = 0.5 * (M + M.conj().T)
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise NumericError("Gram matrix is not positive definite; refine the quadrature")
    return M


@dataclass
class MinExtension:
    degree: int
    coefficients: np.ndarray
    norm_sq: float
    conditioning: float
    norm_sq_dual: float
    method: str
    ladder: list = field(default_factory=list)

    def to_dict(self):
        return {"degree": self.degree,
                "coefficients": [[float(c.real), float(c.imag)] for c in self.coefficients],
                "norm_sq": self.norm_sq, "norm_sq_dual": self.norm_sq_dual,
                "conditioning": self.conditioning, "method": self.method,
                "ladder": [[int(n), float(m)] for n, m in self.ladder]}


def min_extension(domain, weight, N, quad=None):
    """Minimize ``cᴴMc`` subject to ``c₀ = 1`` over degree ≤ N.

    With ``cond(M) ≤ 1e8`` the normal equations ``M y = e₀`` are solved by
    Cholesky; otherwise the weighted Vandermonde matrix is orthonormalized by
    Householder QR and the constrained least-squares problem is solved there.
    Both ``cᴴMc`` and ``1/(e₀ᴴM⁻¹e₀)`` are reported.
    """
    if N < 0:
        raise ConstructionError("degree must be nonnegative")
    zeta, w = disc_quadrature(domain, weight, N, quad)
    sw = np.sqrt(w)
    V = sw[:, None] * zeta[:, None] ** np.arange(N + 1)[None, :]
    sv = np.linalg.svd(V, compute_uv=False)
    if sv[-1] <= 0:
        raise NumericError("singular Gram matrix")
    cond = float((sv[0] / sv[-1]) ** 2)
    M = V.conj().T @ V
    M = 0.5 * (M + M.conj().T)
    e0 = np.zeros(N + 1)
    e0[0] = 1
    if cond <= COND_SWITCH:
        # VᴴV is the conjugate Gram matrix, which is the form of |Σ c_j ζ^j|²
        cf = sla.cho_factor(M)
        y = sla.cho_solve(cf, e0.astype(complex))
        c = y / y[0]
        dual = float(1.0 / y[0].real)
        method = "cholesky"
    else:
        if N == 0:
            c = np.ones(1, complex)
        else:
            q, r = np.linalg.qr(V[:, 1:])
            c1 = -sla.solve_triangular(r, q.conj().T @ V[:, 0])
            c = np.concatenate([[1.0 + 0j], c1])
        method = "qr"
        try:
            y = np.linalg.solve(M, e0.astype(complex))
            dual = float(1.0 / y[0].real)
        except np.linalg.LinAlgError:
            dual = float("nan")
    c[0] = 1.0
    r0 = V @ c
    norm_sq = float(np.vdot(r0, r0).real)
    if not np.isfinite(norm_sq):
        raise NumericError("non-finite extension norm")
    return MinExtension(N, c, norm_sq, cond, dual, method)


def min_extension_auto(domain, weight, quad=None, N0=16, N_max=64, tol=1e-3):
    """Double ``N`` from ``N0`` until ``|m(2N) − m(N)|/m(N) ≤ tol``.

    Returns the extension at the finer degree with the ladder of ``(N, m)``
    attached; raises ``NonConvergence`` if ``N_max`` is reached first.
    """
    ladder = []
    prev = min_extension(domain, weight, N0, quad)
    ladder.append((N0, prev.norm_sq))
    N = N0
    while 2 * N <= N_max:
        cur = min_extension(domain, weight, 2 * N, quad)
        ladder.append((2 * N, cur.norm_sq))
        if abs(cur.norm_sq - prev.norm_sq) <= tol * prev.norm_sq:
            cur.ladder = ladder
            return cur
        prev, N = cur, 2 * N
    raise NonConvergence("minimal norm did not stabilize by N_max",
                         {"ladder": ladder})
