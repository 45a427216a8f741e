"""Cartesian grids on the reduced Hartogs lift in coordinates (x, y, t = log|w|²)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import ConstructionError

INTERIOR, GRAPH, VERTICAL, FLOOR, OUTSIDE = 0, 1, 2, 3, 4
MASK_NAMES = {INTERIOR: "Interior", GRAPH: "GraphBoundary", VERTICAL: "VerticalBoundary",
              FLOOR: "ArtificialFloor", OUTSIDE: "Outside"}
# boundary band width in grid steps; covers trilinear cells of radius-2 circles
BAND = 3


@dataclass
class Grid3:
    """Node lattice, masks and boundary projections.

    Arrays indexed ``[k, j, i]`` correspond to ``(t_k, y_j, x_i)``, so the
    last index runs fastest.  The xy lattice has a node at the origin and is
    symmetric under quarter turns on the nodes that matter.

    Attributes
    ----------
    mask : uint8 array
        Node classes ``INTERIOR, GRAPH, VERTICAL, FLOOR, OUTSIDE``.
    proj_z, proj_t : arrays
        Boundary point assigned to each boundary-band node.
    """

    hd: object
    x: np.ndarray
    t: np.ndarray
    h: float
    ht: float
    delta: float
    Z: np.ndarray = field(repr=False)
    in_xy: np.ndarray = field(repr=False)
    top: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    proj_z: np.ndarray = field(repr=False)
    proj_t: np.ndarray = field(repr=False)
    origin: tuple = (0, 0)

    @property
    def y(self):
        return self.x

    @property
    def n_xy(self):
        return self.x.size

    @property
    def n_t(self):
        return self.t.size

    @property
    def t_min(self):
        return float(self.t[0])

    @property
    def shape(self):
        return self.mask.shape

    @property
    def interior(self):
        return self.mask == INTERIOR

    @property
    def boundary(self):
        return (self.mask == GRAPH) | (self.mask == VERTICAL)

    @property
    def floor(self):
        return self.mask == FLOOR

    def node_coords(self, sel):
        """``(z, t)`` of the nodes selected by a boolean mask."""
        k, j, i = np.nonzero(sel)
        return self.x[i] + 1j * self.x[j], self.t[k]

    def same_as(self, other):
        return (self.shape == other.shape and np.array_equal(self.x, other.x)
                and np.array_equal(self.t, other.t) and np.array_equal(self.mask, other.mask))

    def describe(self):
        counts = {MASK_NAMES[c]: int(np.sum(self.mask == c)) for c in MASK_NAMES}
        return {"n_xy": int(self.n_xy), "n_t": int(self.n_t), "t_min": self.t_min,
                "t_max": float(self.t[-1]), "h": self.h, "ht": self.ht,
                "delta": self.delta, "counts": counts}


def make_grid(hd, n_xy, n_t, t_min, delta=0.05):
    """Grid over the box ``[−R−δ, R+δ]² × [t_min, t_top]``.

    ``R`` is the bounding radius of the base domain and ``t_top`` is the
    larger of 0 and the maximum of ``−φ`` over lattice nodes.  A node is
    Interior when it and its six axis neighbours lie strictly inside the
    lift (neighbours on the floor plane count as inside); ArtificialFloor
    holds the inside nodes of the ``t_min`` plane.  Other nodes within
    ``BAND`` steps of an Interior node are boundary nodes and carry the
    boundary point they project to: vertically onto the graph when the graph
    is nearer in grid units, otherwise onto the nearest wall point (with
    ``t`` clipped to the fiber there).

    Raises
    ------
    ConstructionError
        Grids coarser than 16 nodes per axis, ``t_min > −4``, or no Interior.
    """
    if n_xy < 16 or n_t < 16:
        raise ConstructionError("grid too coarse: need n_xy, n_t >= 16")
    if not t_min <= -4:
        raise ConstructionError("t_min must be <= -4")
    dom = hd.base
    R = dom.bounding_radius
    m = n_xy // 2
    h = (R + delta) / (n_xy - 1 - m)
    x = (np.arange(n_xy) - m) * h
    Z = x[None, :] + 1j * x[:, None]
    in_xy = dom.contains(Z)
    top = np.full(Z.shape, -np.inf)
    with np.errstate(over="ignore"):
        top[in_xy] = -hd.weight.phi(Z[in_xy])
    t_top = max(0.0, float(np.max(top[in_xy])))
    t = np.linspace(t_min, t_top, n_t)
    ht = float(t[1] - t[0])

    inside = in_xy[None, :, :] & (t[:, None, None] < top[None, :, :])
    interior = inside.copy()
    interior[0] = False
    P = np.pad(inside, 1, constant_values=False)
    c = slice(1, -1)
    interior &= (P[2:, c, c] & P[:-2, c, c] & P[c, 2:, c] & P[c, :-2, c]
                 & P[c, c, 2:] & P[c, c, :-2])
    if not interior.any():
        raise ConstructionError("grid too coarse: no Interior node")

    mask = np.full(inside.shape, OUTSIDE, dtype=np.uint8)
    mask[interior] = INTERIOR
    floor = inside.copy()
    floor[1:] = False
    mask[floor] = FLOOR
    near = ndimage.binary_dilation(interior, structure=np.ones((3, 3, 3), bool),
                                   iterations=BAND)
    band = near & ~interior & ~floor

    # per-column wall data
    cols = band.any(axis=0)
    zb = np.zeros(Z.shape, complex)
    zb[cols] = dom.nearest_boundary(Z[cols])
    top_wall = np.full(Z.shape, -np.inf)
    with np.errstate(over="ignore"):
        top_wall[cols] = -hd.weight.phi(zb[cols])

    T = np.broadcast_to(t[:, None, None], inside.shape)
    dist = np.full(Z.shape, np.inf)
    dist[cols & in_xy] = dom.distance_to_boundary(Z[cols & in_xy])
    # graph or wall, whichever is nearer in grid units
    use_graph = in_xy[None] & ((T >= top[None]) | ((top[None] - T) / ht <= dist[None] / h))
    g_sel = band & use_graph
    v_sel = band & ~use_graph
    mask[g_sel] = GRAPH
    mask[v_sel] = VERTICAL

    proj_z = np.full(inside.shape, np.nan + 0j)
    proj_t = np.full(inside.shape, np.nan)
    Zb = np.broadcast_to(Z[None], inside.shape)
    proj_z[g_sel] = Zb[g_sel]
    proj_t[g_sel] = np.broadcast_to(top[None], inside.shape)[g_sel]
    proj_z[v_sel] = np.broadcast_to(zb[None], inside.shape)[v_sel]
    proj_t[v_sel] = np.minimum(T[v_sel], np.broadcast_to(top_wall[None], inside.shape)[v_sel])
    return Grid3(hd, x, t, float(h), ht, float(delta), Z, in_xy, top, mask, proj_z, proj_t,
                 origin=(m, m))
