"""Flat-file output of envelope solutions.

Fields are written as raw little-endian float64 with shape
``(n_t, n_y, n_x)`` (x fastest) next to a JSON sidecar describing the axes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..errors import L2ExtError


def _axis(a):
    a = np.asarray(a, dtype=float)
    return {"start": float(a[0]), "step": float(a[1] - a[0]), "count": int(a.size)}


def write_field(sol, path):
    """Write ``<path>.bin`` and ``<path>.json``; returns both paths."""
    path = Path(path)
    g = sol.grid
    data = np.ascontiguousarray(sol.v, dtype="<f8")
    bin_path = path.parent / (path.name + ".bin")
    side_path = path.parent / (path.name + ".json")
    try:
        bin_path.parent.mkdir(parents=True, exist_ok=True)
        data.tofile(bin_path)
        side = {"dtype": "<f8", "shape": [g.n_t, g.n_xy, g.n_xy], "order": "x-fastest",
                "dims": ["t", "y", "x"], "axes": {"x": _axis(g.x), "y": _axis(g.x),
                                                  "t": _axis(g.t)},
                "missing": "NaN marks nodes outside the computational band",
                "file": bin_path.name}
        side_path.write_text(json.dumps(side, sort_keys=True, indent=2))
    except OSError as exc:
        raise L2ExtError(f"cannot write field to {path}: {exc}") from exc
    return bin_path, side_path


def read_field(path):
    """Inverse of ``write_field``: returns ``(v, sidecar)``."""
    path = Path(path)
    stem = path.name[:-4] if path.suffix == ".bin" else path.name
    side = json.loads((path.parent / (stem + ".json")).read_text())
    v = np.fromfile(path.parent / (stem + ".bin"), dtype=side["dtype"]).reshape(side["shape"])
    return v, side


def write_fiber_csv(sol, path, z0=0.0, n_fine=0):
    """``t, v(z0, t)`` on the fiber nodes (plus ``n_fine`` extra points if exact)."""
    prof = sol.slice_fiber(z0)
    t = prof.t
    if n_fine and prof.fn is not None:
        top = float(sol.grid.hd.fiber_top(z0))
        t = np.union1d(t, np.linspace(t[0], top, n_fine, endpoint=False))
    v = prof(t)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "v"])
            for a, b in zip(t, v):
                w.writerow([repr(float(a)), repr(float(b))])
    except OSError as exc:
        raise L2ExtError(f"cannot write {path}: {exc}") from exc
    return path
