"""Envelope solver through the partial Legendre transform in ``t``.

An S¹-invariant psh function on the lift is convex and nondecreasing in
``t = log|w|²``, so it is the upper envelope of affine pieces

    v(z, t) = sup_{s ≥ 0} ( H_s(z) + s t ),

and ``H_s`` runs over subharmonic functions of ``z`` alone.  The Dirichlet
envelope therefore splits into one planar obstacle problem per slope ``s``:
``H_s`` is the largest subharmonic function below

    ob_s(z) = g(z, −φ(z)) + s φ(z)      (graph part of the boundary)

with boundary values ``γ_s`` on ``∂Ω`` (wall part, see ``BoundaryData``).
Subharmonicity also bounds ``H_s(z)`` by the mean of ``ob_s`` over any circle
about ``z`` inside ``Ω``; those means are affine in ``s`` and tighten the
node obstacle where the contact set falls between lattice nodes (near the
cusp of a weight like ``−1/log|z|²`` at the origin).
Each obstacle problem is discretized with the Shortley–Weller five-point
Laplacian and solved exactly by policy iteration, warm-started along the
slope ladder.  The discrete operator is an M-matrix, so the scheme is
monotone in the data and reproduces constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import ConstructionError, NonConvergence, NumericError

# tie tolerance when comparing the two branches of the complementarity system
TIE = 1e-13
MAX_POLICY = 100
# circle radii (in grid steps) and samples for the sub-mean obstacle bound
CIRCLE_RADII = np.geomspace(0.25, 4.0, 48)
CIRCLE_SAMPLES = 32


@dataclass
class XYOperator:
    """Shortley–Weller Laplacian on the xy lattice nodes inside the base domain.

    ``A @ H + b(γ)`` approximates ``ΔH``, where ``b`` collects the wall values
    ``γ`` at the crossing points ``bz`` (one per cut stencil arm).
    """

    A: sp.csr_matrix
    jj: np.ndarray
    ii: np.ndarray
    zc: np.ndarray
    index: np.ndarray
    brow: np.ndarray
    bcoef: np.ndarray
    bz: np.ndarray

    @property
    def n(self):
        return self.zc.size

    def rhs(self, gam):
        return np.bincount(self.brow, weights=self.bcoef * gam, minlength=self.n)


def xy_operator(grid):
    dom = grid.hd.base
    h = grid.h
    inside = grid.in_xy
    index = -np.ones(inside.shape, dtype=np.int64)
    jj, ii = np.nonzero(inside)
    N = jj.size
    index[jj, ii] = np.arange(N)
    zc = grid.Z[jj, ii]
    ny, nx = inside.shape

    arms = []
    for e, di, dj in ((1.0, 1, 0), (-1.0, -1, 0), (1j, 0, 1), (-1j, 0, -1)):
        ni, nj = ii + di, jj + dj
        valid = (ni >= 0) & (ni < nx) & (nj >= 0) & (nj < ny)
        ok = np.zeros(N, bool)
        ok[valid] = inside[nj[valid], ni[valid]]
        d = np.full(N, h)
        cut = np.nonzero(~ok)[0]
        if cut.size:
            d[cut] = np.maximum(dom.segment_exit(zc[cut], e, h), 1e-6 * h)
        arms.append((e, ok, d, ni, nj))

    rows, cols, vals = [], [], []
    diag = np.zeros(N)
    brow, bcoef, bz = [], [], []
    for a in (0, 2):
        dp, dm = arms[a][2], arms[a + 1][2]
        for e, ok, d, ni, nj in arms[a:a + 2]:
            coef = 2.0 / ((dp + dm) * d)
            diag -= coef
            k = np.nonzero(ok)[0]
            rows.append(k)
            cols.append(index[nj[k], ni[k]])
            vals.append(coef[k])
            c = np.nonzero(~ok)[0]
            brow.append(c)
            bcoef.append(coef[c])
            bz.append(zc[c] + e * d[c])
    rows.append(np.arange(N))
    cols.append(np.arange(N))
    vals.append(diag)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N, N))
    return XYOperator(A, jj, ii, zc, index, np.concatenate(brow), np.concatenate(bcoef),
                      np.concatenate(bz))


def obstacle_solve(op, ob, gam, policy=None):
    """Largest discrete subharmonic ``H ≤ ob`` with wall values ``gam``.

    Solves ``min(ob − H, A H + b) = 0`` by Howard's policy iteration.
    ``policy`` marks nodes where the obstacle is active and is returned for
    warm starts.  Returns ``(H, policy, iterations)``.
    """
    A = op.A
    b = op.rhs(gam)
    if policy is None:
        policy = np.zeros(op.n, bool)
    scale = np.maximum(1.0, np.abs(A.diagonal()))
    for it in range(1, MAX_POLICY + 1):
        H = ob.copy()
        free = ~policy
        if free.any():
            Aff = A[free][:, free]
            rhs = -b[free]
            if policy.any():
                rhs = rhs - A[free][:, policy] @ ob[policy]
            H[free] = spla.spsolve(Aff.tocsc(), rhs)
        LH = A @ H + b
        new = (ob - H) < LH
        # A H carries round-off of size |diag A|·|H|, so ties are judged on that scale
        tie = np.abs((ob - H) - LH) <= TIE * scale * np.maximum(1.0, np.abs(ob))
        new[tie] = policy[tie]
        if np.array_equal(new, policy):
            if not np.all(np.isfinite(H)):
                raise NumericError("non-finite obstacle solution")
            return H, policy, it
        policy = new
    raise NonConvergence("policy iteration did not settle", {"iterations": MAX_POLICY})


def slope_ladder(ht, s_min=1e-6, s_max=1e7, ratio=None):
    """``{0} ∪`` a geometric ladder with ratio ``1 + 0.3·h_t`` by default."""
    q = ratio or 1.0 + 0.3 * ht
    n = int(np.ceil(np.log(s_max / s_min) / np.log(q))) + 1
    return np.concatenate([[0.0], np.geomspace(s_min, s_max, n)])


@dataclass
class LegendreData:
    op: XYOperator
    s: np.ndarray
    H: np.ndarray           # (n_s, n_xy_inside)
    policy_iterations: int
    max_residual: float
    hulls: "ColumnHulls" = None

    def column_value(self, cols, t):
        return self.hulls.value(self.H, self.s, cols, t)


def circle_means(grid, op, bd, radii=CIRCLE_RADII, m=CIRCLE_SAMPLES):
    """Circle means of ``g_top`` and ``φ`` about every xy node, shape ``(R, N)``.

    Circles that leave ``Ω`` get ``G = +inf, P = 0`` so they never bind.
    """
    from .boundary import BIG

    dom = grid.hd.base
    ring = np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
    G = np.full((len(radii), op.n), np.inf)
    P = np.zeros((len(radii), op.n))
    for r, rho in enumerate(radii):
        pts = op.zc[:, None] + rho * grid.h * ring[None, :]
        ok = np.array(dom.contains(pts.ravel()), dtype=bool).reshape(pts.shape).all(axis=1)
        if not ok.any():
            continue
        q = pts[ok].ravel()
        with np.errstate(over="ignore", divide="ignore"):
            ph = np.asarray(grid.hd.weight.phi(q), dtype=float)
            gt = np.minimum(bd.graph_value(q, -ph), BIG)
        G[r, ok] = gt.reshape(-1, m).mean(axis=1)
        P[r, ok] = ph.reshape(-1, m).mean(axis=1)
    keep = np.isfinite(G).any(axis=1)
    return G[keep], P[keep]


def legendre_envelope(grid, bd, s=None):
    """Solve every slope problem; returns the stacked ``H_s``."""
    from .boundary import BIG

    op = xy_operator(grid)
    s = slope_ladder(grid.ht) if s is None else np.asarray(s, dtype=float)
    phi = -grid.top[op.jj, op.ii]
    g_top = np.minimum(bd.graph_value(op.zc, -phi), BIG)
    with np.errstate(over="ignore"):
        phib = grid.hd.weight.phi(op.bz)
    caps = bd.wall_caps(op.bz, -phib)
    Gc, Pc = circle_means(grid, op, bd)
    H = np.empty((s.size, op.n))
    policy = None
    iters = 0
    resid = 0.0
    for k, sk in enumerate(s):
        ob = np.minimum(g_top + sk * phi, BIG) if sk > 0 else g_top
        if Gc.size:
            ob = np.minimum(ob, np.min(Gc + sk * Pc, axis=0))
        Hk, policy, it = obstacle_solve(op, ob, caps(sk), policy)
        iters += it
        LH = op.A @ Hk + op.rhs(caps(sk))
        resid = max(resid, float(np.max(np.abs(np.minimum(ob - Hk, LH)))))
        H[k] = Hk
    return LegendreData(op, s, H, iters, resid, column_hulls(H, s))


def upper_envelope(h, s, t):
    """``max_k (h_k + s_k t)`` for an array of ``t`` (chunked over slopes)."""
    t = np.asarray(t, dtype=float)
    out = np.full(np.broadcast(h[..., 0], t).shape if h.ndim > 1 else t.shape, -np.inf)
    for k in range(s.size):
        hk = h[..., k] if h.ndim > 1 else h[k]
        np.maximum(out, hk + s[k] * t, out=out)
    return out


def envelope_integral(h, s, t_top):
    """``∫_{−∞}^{t_top} e^{t − V(t)} dt`` for ``V(t) = max_k (h_k + s_k t)``.

    ``s`` must start with slope 0 and be increasing.  The active pieces of the
    upper envelope are found exactly and each exponential is integrated in
    closed form, so there is no truncation.
    Returns ``(integral, breakpoints, active)``.
    """
    # upper hull of lines, slopes increasing (active from left to right)
    hull = []
    for k in range(s.size):
        while hull:
            j = hull[-1]
            if s[k] == s[j]:
                if h[k] >= h[j]:
                    hull.pop()
                    continue
                break
            if len(hull) >= 2:
                i = hull[-2]
                # line j is useless if k overtakes i no later than j does
                if (h[i] - h[k]) * (s[j] - s[i]) <= (h[i] - h[j]) * (s[k] - s[i]):
                    hull.pop()
                    continue
            break
        if not hull or s[k] != s[hull[-1]]:
            hull.append(k)
    bps = [(h[a] - h[b]) / (s[b] - s[a]) for a, b in zip(hull[:-1], hull[1:])]
    # keep pieces that start below t_top
    edges = [-np.inf] + bps + [np.inf]
    total = 0.0
    active = []
    for n, k in enumerate(hull):
        lo, hi = edges[n], min(edges[n + 1], t_top)
        if lo >= hi:
            continue
        active.append(k)
        a = 1.0 - s[k]
        if np.isinf(lo) and a <= 0:
            raise NumericError("envelope integral diverges: leftmost slope must be < 1")
        # ∫_lo^hi e^{a t − h_k} dt
        if a == 0:
            total += np.exp(-h[k]) * (hi - lo)
        elif np.isinf(lo):
            total += np.exp(a * hi - h[k]) / a
        else:
            total += (np.exp(a * hi - h[k]) - np.exp(a * lo - h[k])) / a
    return float(total), np.array([e for e in bps if e < t_top]), active


@dataclass
class ColumnHulls:
    """Upper hulls of the lines ``t ↦ H_s(z_c) + s t``, one per xy column.

    ``lines[c, r]`` is the slope index of the r-th active line (slopes
    increasing), ``bp[c, r]`` the breakpoint between lines ``r`` and
    ``r + 1``; rows are padded with the last line and ``+inf``.
    """

    lines: np.ndarray
    bp: np.ndarray
    count: np.ndarray

    def value(self, H, s, cols, t):
        """``max_k (H[k, c] + s_k t)`` for column indices ``cols`` and times ``t``."""
        cols = np.asarray(cols)
        t = np.asarray(t, dtype=float)
        K = self.bp.shape[1]
        lo = np.zeros(cols.shape, np.int64)
        hi = np.full(cols.shape, K, np.int64)
        # number of breakpoints below t, by bisection
        while True:
            act = lo < hi
            if not act.any():
                break
            mid = (lo + hi) // 2
            below = np.zeros(cols.shape, bool)
            below[act] = self.bp[cols[act], np.minimum(mid[act], K - 1)] < t[act]
            lo = np.where(act & below, mid + 1, lo)
            hi = np.where(act & ~below, mid, hi)
        line = self.lines[cols, lo]
        sl = s[line]
        with np.errstate(invalid="ignore"):
            out = H[line, cols] + np.where(sl == 0, 0.0, sl * t)
        return out


def column_hulls(H, s):
    """Vectorized monotone-chain hulls for every column of ``H`` (slopes increasing)."""
    n_s, N = H.shape
    if np.any(np.diff(s) <= 0):
        raise ConstructionError("slopes must be strictly increasing")
    stack = np.zeros((N, n_s), dtype=np.int32)
    size = np.zeros(N, dtype=np.int64)
    rows = np.arange(N)
    for k in range(n_s):
        hk = H[k]
        while True:
            cand = np.nonzero(size >= 2)[0]
            if cand.size == 0:
                break
            j = stack[cand, size[cand] - 1]
            i = stack[cand, size[cand] - 2]
            hi_, hj = H[i, cand], H[j, cand]
            pop = (hi_ - hk[cand]) * (s[j] - s[i]) <= (hi_ - hj) * (s[k] - s[i])
            if not pop.any():
                break
            size[cand[pop]] -= 1
        stack[rows, size] = k
        size += 1
    K = int(size.max())
    lines = stack[:, :K].copy()
    # pad with the last active line
    pad = np.arange(K)[None, :] >= size[:, None]
    lines[pad] = np.repeat(lines[rows, size - 1], K - size)
    a, b = lines[:, :-1], lines[:, 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        bp = (H[a, rows[:, None]] - H[b, rows[:, None]]) / (s[b] - s[a])
    bp = np.where(pad[:, 1:], np.inf, bp)
    bp = np.concatenate([bp, np.full((N, 1), np.inf)], axis=1)
    return ColumnHulls(lines, bp, size)
