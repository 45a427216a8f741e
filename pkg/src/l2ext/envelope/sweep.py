"""Monotone wide-stencil iteration for the envelope (coarse-grid cross-check).

Each Jacobi sweep replaces the Interior values by

    v ← min(v, min_d avg_d(v))

where ``avg_d`` is the circle average along direction ``d`` (see
``stencil``); boundary nodes keep their data and the floor plane copies the
plane above it.  Started above the solution, the iterates decrease
monotonically and the sup-change is nonincreasing, because the update is
order preserving and commutes with adding constants.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import NumericError
from .boundary import impose_boundary
from .grid import FLOOR, INTERIOR
from .stencil import operators


def sweep_solve(grid, bd, stencil, tol=1e-7, max_sweeps=20_000, threads=1, ops=None):
    """Iterate until the sup-change is ``≤ tol``; returns ``(v, history, converged)``."""
    g = impose_boundary(grid, bd)
    centers = np.flatnonzero(grid.mask == INTERIOR)
    if ops is None:
        ops = operators(grid, bd, centers, stencil)
    v = g.copy()
    vmax = float(np.nanmax(g))
    v[grid.mask == INTERIOR] = vmax
    v[grid.mask == FLOOR] = vmax
    flat = v.ravel()
    fk, fj, fi = np.nonzero(grid.mask == FLOOR)
    floor_idx = np.ravel_multi_index((fk, fj, fi), grid.shape)
    above_idx = np.ravel_multi_index((fk + 1, fj, fi), grid.shape)
    if np.any(np.isnan(flat[above_idx])):
        raise NumericError("floor node without a value above it")
    work = np.where(np.isfinite(flat), flat, 0.0)

    pool = ThreadPoolExecutor(threads) if threads > 1 else None

    def averages(x):
        if pool is None:
            return [P @ x + c for P, c in ops]
        return list(pool.map(lambda pc: pc[0] @ x + pc[1], ops))

    history = []
    converged = False
    try:
        for _ in range(max_sweeps):
            avgs = averages(work)
            best = avgs[0]
            for a in avgs[1:]:
                best = np.minimum(best, a)
            old = work[centers]
            new = np.minimum(old, best)
            if np.any(np.isnan(new)):
                raise NumericError("NaN in envelope sweep")
            nxt = work.copy()
            nxt[centers] = new
            nxt[floor_idx] = nxt[above_idx]
            change = float(np.max(np.abs(nxt - work)))
            work = nxt
            history.append(change)
            if change <= tol:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()
    out = work.reshape(grid.shape).copy()
    out[np.isnan(g) & ~((grid.mask == INTERIOR) | (grid.mask == FLOOR))] = np.nan
    return out, history, converged
