"""Wide-stencil circle averages on the reduced lift.

In the tube coordinates ``(z, τ = t + iθ)`` an S¹-invariant function is psh
exactly when it is psh in ``(z, τ)``, so complex lines are circles

    z' = z + r_z a e^{iϑ},      t' = t + r_t Re(b e^{iϑ}),

for a direction ``(a, b)``.  ``r_z`` and ``r_t`` are ``radius_steps`` grid
steps in their own axes.  Samples inside the lift are read by trilinear
interpolation of the node field; samples outside take the boundary data at
the exit point found by bisection along the segment from the center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import ConstructionError
from ..hartogs import complex_directions
from .boundary import BIG


@dataclass(frozen=True)
class StencilSpec:
    n_dirs: int = 13
    radius_steps: float = 2.0
    samples: int = 16
    exit_bisections: int = 8

    def __post_init__(self):
        if self.n_dirs < 2 or self.samples < 4 or self.radius_steps <= 0:
            raise ConstructionError("invalid stencil")

    def to_dict(self):
        return {"n_dirs": self.n_dirs, "radius_steps": self.radius_steps,
                "samples": self.samples, "exit_bisections": self.exit_bisections}


def _inside(grid, z, t):
    return grid.hd.contains_t(z, t)


def _exit_values(grid, bd, z0, t0, z1, t1, n_bis):
    """Boundary data where the segment from an inside to an outside point leaves."""
    zi, ti = z0.copy(), t0.copy()
    zo, to = z1.copy(), t1.copy()
    for _ in range(n_bis):
        zm, tm = 0.5 * (zi + zo), 0.5 * (ti + to)
        ins = _inside(grid, zm, tm)
        zi = np.where(ins, zm, zi)
        ti = np.where(ins, tm, ti)
        zo = np.where(ins, zo, zm)
        to = np.where(ins, to, tm)
    dom = grid.hd.base
    on_wall = ~dom.contains(zo)
    val = np.empty(zo.shape)
    if (~on_wall).any():
        zg = zi[~on_wall]
        val[~on_wall] = bd.graph_value(zg, grid.hd.fiber_top(zg))
    if on_wall.any():
        zb = dom.nearest_boundary(zo[on_wall])
        with np.errstate(over="ignore"):
            tb = -grid.hd.weight.phi(zb)
        val[on_wall] = bd.value(zb, np.minimum(to[on_wall], tb))
    return np.minimum(val, BIG)


def _trilinear(grid, z, t):
    """Flat corner indices ``(m, 8)`` and weights for points in the box."""
    x0 = grid.x[0]
    fx = (z.real - x0) / grid.h
    fy = (z.imag - x0) / grid.h
    ft = (t - grid.t[0]) / grid.ht
    n_t, n_y, n_x = grid.shape
    i = np.clip(np.floor(fx).astype(np.int64), 0, n_x - 2)
    j = np.clip(np.floor(fy).astype(np.int64), 0, n_y - 2)
    k = np.clip(np.floor(ft).astype(np.int64), 0, n_t - 2)
    ax, ay, at = fx - i, fy - j, ft - k
    idx = np.empty((z.size, 8), dtype=np.int64)
    wts = np.empty((z.size, 8))
    c = 0
    for dk in (0, 1):
        wk = at if dk else 1 - at
        for dj in (0, 1):
            wj = ay if dj else 1 - ay
            for di in (0, 1):
                wi = ax if di else 1 - ax
                idx[:, c] = ((k + dk) * n_y + (j + dj)) * n_x + (i + di)
                wts[:, c] = wk * wj * wi
                c += 1
    return idx, wts


def circle_samples(grid, bd, centers, a, b, spec):
    """Samples of the circle through each center in direction ``(a, b)``.

    Yields ``(rows_in, z_in, t_in, rows_out, exit_values)`` per angle.
    """
    kk, jj, ii = np.unravel_index(centers, grid.shape)
    zc = grid.x[ii] + 1j * grid.x[jj]
    tc = grid.t[kk]
    rz = spec.radius_steps * grid.h
    rt = spec.radius_steps * grid.ht
    for q in range(spec.samples):
        e = np.exp(2j * np.pi * q / spec.samples)
        zs = zc + rz * a * e
        ts = np.maximum(tc + rt * np.real(b * e), grid.t[0])
        ins = _inside(grid, zs, ts)
        r_in = np.nonzero(ins)[0]
        r_out = np.nonzero(~ins)[0]
        ev = np.zeros(0)
        if r_out.size:
            ev = _exit_values(grid, bd, zc[r_out], tc[r_out], zs[r_out], ts[r_out],
                              spec.exit_bisections)
        yield r_in, zs[r_in], ts[r_in], r_out, ev


def direction_operator(grid, bd, centers, a, b, spec):
    """Circle average of the trilinear interpolant as ``P @ v.ravel() + c``.

    ``centers`` are flat node indices.  Returns ``(P, c)`` with ``P`` of
    shape ``(len(centers), grid.size)``.
    """
    m = centers.size
    ns = spec.samples
    rows, cols, vals = [np.zeros(0, np.int64)], [np.zeros(0, np.int64)], [np.zeros(0)]
    const = np.zeros(m)
    for r_in, z_in, t_in, r_out, ev in circle_samples(grid, bd, centers, a, b, spec):
        if r_in.size:
            idx, w = _trilinear(grid, z_in, t_in)
            rows.append(np.repeat(r_in, 8))
            cols.append(idx.ravel())
            vals.append(w.ravel() / ns)
        const[r_out] += ev / ns
    P = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(m, int(np.prod(grid.shape))))
    P.sum_duplicates()
    return P, const


def circle_average(grid, bd, centers, a, b, spec, value_fn, exited=None):
    """Circle average with inside samples read from ``value_fn(z, t)``.

    Centers with a sample outside the lift are flagged in ``exited``.
    """
    avg = np.zeros(centers.size)
    for r_in, z_in, t_in, r_out, ev in circle_samples(grid, bd, centers, a, b, spec):
        if r_in.size:
            avg[r_in] += value_fn(z_in, t_in)
        avg[r_out] += ev
        if exited is not None:
            exited[r_out] = True
    return avg / spec.samples


def operators(grid, bd, centers, spec):
    a, b = complex_directions(spec.n_dirs)
    return [direction_operator(grid, bd, centers, a[d], b[d], spec) for d in range(spec.n_dirs)]


def subsample(idx, max_nodes, seed=0):
    """Deterministic subsample of node indices (sorted)."""
    if max_nodes is None or idx.size <= max_nodes:
        return idx
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(idx, size=max_nodes, replace=False))


@dataclass
class Diagnostics:
    saturation_residual: float
    psh_violation: float
    nodes: int
    worst_saturation_node: tuple
    worst_psh_node: tuple
    saturation_residual_deep: float = 0.0
    psh_violation_deep: float = 0.0
    deep_nodes: int = 0

    def to_dict(self):
        return {"saturation_residual": self.saturation_residual,
                "psh_violation": self.psh_violation, "nodes": self.nodes,
                "saturation_residual_deep": self.saturation_residual_deep,
                "psh_violation_deep": self.psh_violation_deep, "deep_nodes": self.deep_nodes,
                "worst_saturation_node": list(self.worst_saturation_node),
                "worst_psh_node": list(self.worst_psh_node)}


def diagnostics(grid, bd, v, spec=None, value_fn=None, max_nodes=50_000, seed=0):
    """Discrete psh and saturation residuals of a node field on Interior nodes.

    ``psh_violation = max_{node, d} (v − avg_d)⁺`` and
    ``saturation_residual = max_node |min_d avg_d − v|``.  Inside samples are
    read from ``value_fn`` when given, otherwise by trilinear interpolation
    of ``v``.  The ``_deep`` variants restrict to nodes whose circles stay
    inside the lift, away from the first-order boundary layer.
    """
    spec = spec or StencilSpec()
    centers = subsample(np.flatnonzero(grid.interior), max_nodes, seed)
    vf = v.ravel()
    vc = vf[centers]
    best = np.full(centers.size, np.inf)
    psh = np.zeros(centers.size)
    exited = np.zeros(centers.size, bool)
    a, b = complex_directions(spec.n_dirs)
    vz = np.where(np.isfinite(vf), vf, 0.0)
    for d in range(spec.n_dirs):
        if value_fn is None:
            fn = lambda z, t: _trilinear_eval(grid, vz, z, t)
        else:
            fn = value_fn
        avg = circle_average(grid, bd, centers, a[d], b[d], spec, fn, exited)
        best = np.minimum(best, avg)
        psh = np.maximum(psh, vc - avg)
    sat = np.abs(best - vc)
    ks = int(np.argmax(sat))
    kp = int(np.argmax(psh))
    deep = ~exited

    def node(k):
        return tuple(int(q) for q in np.unravel_index(centers[k], grid.shape))

    def dmax(x):
        return float(np.max(x[deep])) if deep.any() else 0.0
    return Diagnostics(float(sat[ks]), float(psh[kp]), int(centers.size), node(ks), node(kp),
                       dmax(sat), dmax(psh), int(deep.sum()))


def _trilinear_eval(grid, vflat, z, t):
    idx, w = _trilinear(grid, z, t)
    return np.sum(vflat[idx] * w, axis=1)


def scaled_tolerance(grid, base=5e-3, ref_n=64):
    """``base`` at a 64-node grid on the same box, scaled linearly with ``h``."""
    R = grid.hd.base.bounding_radius + grid.delta
    m = ref_n // 2
    h_ref = R / (ref_n - 1 - m)
    return base * grid.h / h_ref
