"""Mesh to UDC fitting.

Crossings between the mesh and the inside edges are found per axis by
rasterizing every triangle onto the lattice of edge lines perpendicular to
that axis. Each lattice line is tested against the triangle's projection, the
hit height along the axis picks the edge. Vertices come from a regularized
quadratic error function per cube, flags from edge occupancy.

Ties (an edge line passing exactly through a triangle edge or vertex) are
settled twice over: the grid is shifted by ``FitConfig.shift`` grid units before
testing, and any exact zero that survives is broken by simulation of
simplicity on a canonically ordered edge, so two triangles sharing an edge
never both miss (or both claim) a line crossing between them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .core import AXES, DEFAULT_VERTEX, GridSpec, TriangleMesh, UdcField, ring_offsets
from .errors import DegenerateInputError, DomainError


@dataclass(frozen=True)
class FitConfig:
    qef_lambda: float = 1e-3
    shift: Tuple[float, float, float] = (1e-7, 2e-7, 3e-7)


@dataclass(frozen=True)
class EdgeCrossing:
    axis: int
    index: Tuple[int, int, int]
    point: Tuple[float, float, float]   # grid units
    normal: Tuple[float, float, float]  # unit length, orientation arbitrary
    triangle: int = -1


@dataclass(frozen=True)
class Crossings:
    """All crossings of a mesh, column-wise, sorted by (axis, edge, triangle)."""

    axis: np.ndarray      # (n,) int64
    index: np.ndarray     # (n, 3) int64 lower node of the edge
    point: np.ndarray     # (n, 3) float64 grid units
    normal: np.ndarray    # (n, 3) float64
    triangle: np.ndarray  # (n,) int64

    def __len__(self):
        return len(self.axis)

    def to_list(self) -> List[EdgeCrossing]:
        return [
            EdgeCrossing(int(a), tuple(int(c) for c in i), tuple(p), tuple(n), int(t))
            for a, i, p, n, t in zip(self.axis, self.index, self.point.tolist(),
                                     self.normal.tolist(), self.triangle)
        ]

    @classmethod
    def from_list(cls, items) -> "Crossings":
        items = list(items)
        if not items:
            return _empty_crossings()
        return cls(
            np.array([c.axis for c in items], dtype=np.int64),
            np.array([c.index for c in items], dtype=np.int64).reshape(-1, 3),
            np.array([c.point for c in items], dtype=np.float64).reshape(-1, 3),
            np.array([c.normal for c in items], dtype=np.float64).reshape(-1, 3),
            np.array([c.triangle for c in items], dtype=np.int64),
        )


def _empty_crossings() -> Crossings:
    return Crossings(np.zeros(0, np.int64), np.zeros((0, 3), np.int64), np.zeros((0, 3)),
                     np.zeros((0, 3)), np.zeros(0, np.int64))


def to_grid(points: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Model space ``[-0.5, 0.5]^3`` to grid units."""
    return (np.asarray(points, dtype=np.float64) + 0.5) * np.asarray(grid.dims, dtype=np.float64)


def to_model(points: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.asarray(points, dtype=np.float64) / np.asarray(grid.dims, dtype=np.float64) - 0.5


def check_domain(mesh: TriangleMesh, grid: GridSpec) -> np.ndarray:
    """Grid-space vertices; raises unless all lie strictly inside the domain."""
    g = to_grid(mesh.vertices, grid)
    dims = np.asarray(grid.dims, dtype=np.float64)
    if g.size and (g.min() <= 0.0 or np.any(g.max(axis=0) >= dims)):
        raise DomainError("mesh must lie strictly inside [-0.5, 0.5]^3")
    return g


def _edge_fn(a, b, p, sos=True):
    """Canonical 2D edge function: sign of p relative to the line a->b, with a
    before b lexicographically. With ``sos`` exact zeros are broken by
    perturbing p by (eta, eta^2), so the result is +1 or -1."""
    swap = (a[:, 0] > b[:, 0]) | ((a[:, 0] == b[:, 0]) & (a[:, 1] > b[:, 1]))
    lo = np.where(swap[:, None], b, a)
    hi = np.where(swap[:, None], a, b)
    d = hi - lo
    e = d[:, 0] * (p[:, 1] - lo[:, 1]) - d[:, 1] * (p[:, 0] - lo[:, 0])
    s = np.sign(e)
    tie = s == 0
    if sos and np.any(tie):
        # d_u * eta^2 - d_w * eta: the eta term dominates when d_w != 0
        dt = d[tie]
        s[tie] = np.where(dt[:, 1] != 0, -np.sign(dt[:, 1]), np.sign(dt[:, 0]))
    return s


def _axis_crossings(g: np.ndarray, tris: np.ndarray, normals: np.ndarray,
                    grid: GridSpec, axis: int, shift: np.ndarray):
    u, w = (axis + 1) % 3, (axis + 2) % 3
    n_u, n_w = grid.dims[u], grid.dims[w]
    n_a = grid.dims[axis]

    # Shifting the grid by +shift is the same as moving the mesh by -shift.
    gs = g - shift
    q = gs[tris][:, :, [u, w]]  # (M, 3, 2)

    # Which side of each (canonical) edge the opposite corner lies on.
    corners = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
    side = np.stack([_edge_fn(q[:, i], q[:, j], q[:, k], sos=False) for i, j, k in corners], axis=1)
    ok = np.all(side != 0, axis=1)
    # Orientation implied by each edge must agree; otherwise the projection
    # is numerically flat and the edge lines are parallel to the triangle.
    swapped = np.stack([
        (q[:, i, 0] > q[:, j, 0]) | ((q[:, i, 0] == q[:, j, 0]) & (q[:, i, 1] > q[:, j, 1]))
        for i, j, _ in corners], axis=1)
    orient = side * np.where(swapped, -1, 1)
    ok &= np.all(orient == orient[:, :1], axis=1)
    ok &= np.abs(normals[:, axis]) > 0

    lo = q.min(axis=1)
    hi = q.max(axis=1)
    j0 = np.maximum(np.ceil(lo[:, 0]), 1).astype(np.int64)
    j1 = np.minimum(np.floor(hi[:, 0]), n_u - 1).astype(np.int64)
    k0 = np.maximum(np.ceil(lo[:, 1]), 1).astype(np.int64)
    k1 = np.minimum(np.floor(hi[:, 1]), n_w - 1).astype(np.int64)
    nj = np.where(ok, np.maximum(j1 - j0 + 1, 0), 0)
    nk = np.where(ok, np.maximum(k1 - k0 + 1, 0), 0)
    count = nj * nk
    total = int(count.sum())
    if total == 0:
        return None

    tid = np.repeat(np.arange(len(tris)), count)
    start = np.repeat(np.cumsum(count) - count, count)
    local = np.arange(total) - start
    nkt = nk[tid]
    jj = j0[tid] + local // nkt
    kk = k0[tid] + local % nkt
    p = np.stack([jj, kk], axis=1).astype(np.float64)

    qt = q[tid]
    inside = np.ones(total, dtype=bool)
    for e, (i, j, k) in enumerate(corners):
        inside &= _edge_fn(qt[:, i], qt[:, j], p) == side[tid, e]
    if not np.any(inside):
        return None
    tid, jj, kk, p, qt = tid[inside], jj[inside], kk[inside], p[inside], qt[inside]

    # Height along the axis in the shifted frame selects the edge.
    d1 = qt[:, 1] - qt[:, 0]
    d2 = qt[:, 2] - qt[:, 0]
    dp = p - qt[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    b1 = (dp[:, 0] * d2[:, 1] - dp[:, 1] * d2[:, 0]) / det
    b2 = (d1[:, 0] * dp[:, 1] - d1[:, 1] * dp[:, 0]) / det
    b1 = np.clip(b1, 0.0, 1.0)
    b2 = np.clip(b2, 0.0, 1.0 - b1)
    h = gs[tris[tid]][:, :, axis]
    h_shift = h[:, 0] + b1 * (h[:, 1] - h[:, 0]) + b2 * (h[:, 2] - h[:, 0])
    ii = np.clip(np.floor(h_shift).astype(np.int64), 0, n_a - 1)

    # Reported point: the unshifted edge line meets the unshifted triangle plane.
    nrm = normals[tid]
    p0 = g[tris[tid, 0]]
    h_true = p0[:, axis] - (nrm[:, u] * (jj - p0[:, u]) + nrm[:, w] * (kk - p0[:, w])) / nrm[:, axis]
    h_true = np.clip(h_true, ii, ii + 1)

    index = np.empty((len(tid), 3), dtype=np.int64)
    index[:, axis] = ii
    index[:, u] = jj
    index[:, w] = kk
    point = np.empty((len(tid), 3))
    point[:, axis] = h_true
    point[:, u] = jj
    point[:, w] = kk
    return index, point, nrm, tid


def find_crossings(mesh: TriangleMesh, grid: GridSpec, config: FitConfig = FitConfig()) -> Crossings:
    """Every transversal intersection of the mesh with an inside edge."""
    g = check_domain(mesh, grid)
    tris = mesh.triangles
    if not len(tris):
        return _empty_crossings()
    pts = g[tris]
    nrm = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
    length = np.linalg.norm(nrm, axis=1)
    keep = length > 0
    nrm[keep] /= length[keep, None]
    nrm[~keep] = 0.0
    shift = np.asarray(config.shift, dtype=np.float64)

    parts = []
    for axis in AXES:
        res = _axis_crossings(g, tris, nrm, grid, axis, shift)
        if res is None:
            continue
        index, point, normal, tid = res
        parts.append((np.full(len(tid), axis, dtype=np.int64), index, point, normal, tid))
    if not parts:
        return _empty_crossings()
    axis, index, point, normal, tid = (np.concatenate(c) for c in zip(*parts))
    X, Y, Z = grid.dims
    key = np.lexsort((tid, index[:, 0] + (X + 1) * (index[:, 1] + (Y + 1) * index[:, 2]), axis))
    return Crossings(axis[key], index[key], point[key], normal[key], tid[key])


def compute_edge_crossings(mesh: TriangleMesh, grid: GridSpec,
                           config: FitConfig = FitConfig()) -> List[EdgeCrossing]:
    return find_crossings(mesh, grid, config).to_list()


def representative_crossings(crossings: Crossings) -> Crossings:
    """One crossing per edge: the one nearest the edge midpoint (first on ties)."""
    if not len(crossings):
        return crossings
    mid = crossings.index[np.arange(len(crossings)), crossings.axis] + 0.5
    off = np.abs(crossings.point[np.arange(len(crossings)), crossings.axis] - mid)
    key = np.stack([crossings.axis, *crossings.index.T], axis=1)
    order = np.lexsort((np.arange(len(off)), off, *key.T[::-1]))
    k = key[order]
    first = np.ones(len(k), dtype=bool)
    first[1:] = np.any(k[1:] != k[:-1], axis=1)
    sel = np.sort(order[first])
    return Crossings(crossings.axis[sel], crossings.index[sel], crossings.point[sel],
                     crossings.normal[sel], crossings.triangle[sel])


def _solve_qef(ata: np.ndarray, atb: np.ndarray, centroid: np.ndarray, lam: float) -> np.ndarray:
    # (A^T A + lam I) v = A^T b + lam m, batched over the leading axis
    lhs = ata + lam * np.eye(3)
    rhs = atb + lam * centroid
    if lam > 0:
        v = np.linalg.solve(lhs, rhs[..., None])[..., 0]
    else:
        # unregularized: minimum-norm step away from the centroid
        step = [np.linalg.lstsq(m, r - m @ c, rcond=1e-9)[0] for m, r, c in zip(lhs, rhs, centroid)]
        v = centroid + np.asarray(step).reshape(centroid.shape)
    return np.clip(v, 0.0, 1.0)


def solve_cell_vertex(points, normals, qef_lambda: float = FitConfig.qef_lambda) -> np.ndarray:
    """Best-fit vertex for one cube from its Hermite samples.

    ``points`` are crossing points relative to the cube (components in
    [0, 1]) and ``normals`` their unit normals. Minimizes
    ``sum((n . (v - p))**2) + qef_lambda * |v - m|**2`` with ``m`` the mean
    crossing point, then clamps to the cube. No samples gives the cube center.
    """
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
    if len(p) != len(n):
        raise ValueError("points and normals differ in length")
    if not len(p):
        return np.array(DEFAULT_VERTEX)
    ata = n.T @ n
    atb = n.T @ np.einsum("ij,ij->i", n, p)
    return _solve_qef(ata[None], atb[None], p.mean(axis=0)[None], qef_lambda)[0]


def qef_objective(v, points, normals, qef_lambda: float = FitConfig.qef_lambda) -> float:
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
    v = np.asarray(v, dtype=np.float64)
    r = np.einsum("ij,ij->i", n, v - p)
    return float(r @ r + qef_lambda * np.sum((v - p.mean(axis=0)) ** 2))


def build_face_flags(crossings, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flag an inside edge iff at least one crossing lies on it."""
    if not isinstance(crossings, Crossings):
        crossings = Crossings.from_list(crossings)
    flags = tuple(np.zeros(s, dtype=bool) for s in grid.face_shapes)
    for axis in AXES:
        sel = crossings.axis == axis
        if not np.any(sel):
            continue
        idx = crossings.index[sel].copy()
        for c in AXES:
            if c != axis:
                idx[:, c] -= 1
        shape = grid.face_shape(axis)
        if np.any(idx < 0) or np.any(idx >= np.asarray(shape)):
            raise IndexError("crossing on an edge that is not inside the grid")
        flags[axis][idx[:, 0], idx[:, 1], idx[:, 2]] = True
    return flags


def solve_vertices(crossings: Crossings, grid: GridSpec, qef_lambda: float = FitConfig.qef_lambda) -> np.ndarray:
    """Vertex part ``(3, X, Y, Z)`` from all crossings, each feeding its four cubes."""
    X, Y, Z = grid.dims
    n_cubes = grid.cube_count
    ata = np.zeros((n_cubes, 3, 3))
    atb = np.zeros((n_cubes, 3))
    psum = np.zeros((n_cubes, 3))
    cnt = np.zeros(n_cubes, dtype=np.int64)
    for axis in AXES:
        sel = np.flatnonzero(crossings.axis == axis)
        if not len(sel):
            continue
        idx = crossings.index[sel]
        pts = crossings.point[sel]
        nrm = crossings.normal[sel]
        nn = nrm[:, :, None] * nrm[:, None, :]
        for off in ring_offsets(axis):
            cube = idx + off
            lin = cube[:, 0] + X * (cube[:, 1] + Y * cube[:, 2])
            rel = pts - cube
            # np.add.at accumulates in input order: results do not depend on
            # how the crossings were produced, only on their sorted order.
            np.add.at(ata, lin, nn)
            np.add.at(atb, lin, nrm * np.einsum("ij,ij->i", nrm, rel)[:, None])
            np.add.at(psum, lin, rel)
            np.add.at(cnt, lin, 1)
    v = np.empty((n_cubes, 3))
    v[:] = DEFAULT_VERTEX
    hit = cnt > 0
    if np.any(hit):
        v[hit] = _solve_qef(ata[hit], atb[hit], psum[hit] / cnt[hit, None], qef_lambda)
    # linear index is x-fastest, so reshape in Fortran order
    return v.T.reshape(3, X, Y, Z, order="F")


def fit_udc(mesh: TriangleMesh, grid: GridSpec, config: FitConfig = FitConfig(),
            return_crossings: bool = False):
    """Fit a UDC field to ``mesh`` (model space, strictly inside the unit domain)."""
    if not mesh.n_triangles:
        raise DegenerateInputError("cannot fit an empty mesh")
    crossings = find_crossings(mesh, grid, config)
    flags = build_face_flags(crossings, grid)
    vertices = solve_vertices(crossings, grid, config.qef_lambda)
    udc = UdcField(grid, vertices, flags)
    if return_crossings:
        return udc, crossings
    return udc
