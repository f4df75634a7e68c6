"""UDC to mesh: one quad per true flag, built from the four cube vertices
around the flagged edge."""
from __future__ import annotations

import numpy as np

from .core import AXES, TriangleMesh, UdcField, cube_linear_index, ring_offsets


def flagged_quads(udc: UdcField) -> np.ndarray:
    """(F, 4) linear cube indices, one row per true flag, in counter-clockwise
    order about the edge axis. Rows are grouped by axis, then ordered by edge
    index with the lowest coordinate fastest."""
    dims = udc.grid.dims
    rows = []
    for axis in AXES:
        f = udc.face_part[axis]
        # transpose so that argwhere enumerates with x fastest
        idx = np.argwhere(f.transpose(2, 1, 0))[:, ::-1]
        if not len(idx):
            continue
        for c in AXES:
            if c != axis:
                idx[:, c] += 1
        cubes = idx[:, None, :] + ring_offsets(axis)[None]
        rows.append(cube_linear_index(cubes, dims))
    if not rows:
        return np.zeros((0, 4), dtype=np.int64)
    return np.concatenate(rows)


def cube_vertices_model(udc: UdcField) -> np.ndarray:
    """(|C|, 3) model-space positions of all cube vertices, x-fastest order."""
    X, Y, Z = udc.grid.dims
    rel = udc.vertex_part.astype(np.float64).reshape(3, -1, order="F").T
    lin = np.arange(X * Y * Z)
    origin = np.stack([lin % X, (lin // X) % Y, lin // (X * Y)], axis=1)
    return (origin + rel) / np.asarray(udc.grid.dims, dtype=np.float64) - 0.5


def extract_mesh(udc: UdcField) -> TriangleMesh:
    """Mesh of the dual faces of all flagged edges.

    Each quad (c0, c1, c2, c3) becomes triangles (c0, c1, c2) and
    (c0, c2, c3). Vertices are emitted once per used cube, ordered by cube
    index; unused cubes are dropped. UDC is unsigned, so the winding is
    deterministic but not a consistent orientation.
    """
    quads = flagged_quads(udc)
    if not len(quads):
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    used, remap = np.unique(quads, return_inverse=True)
    remap = remap.reshape(quads.shape)
    verts = cube_vertices_model(udc)[used]
    tris = np.empty((2 * len(quads), 3), dtype=np.int64)
    tris[0::2] = remap[:, [0, 1, 2]]
    tris[1::2] = remap[:, [0, 2, 3]]
    return TriangleMesh(verts, tris)


def nonmanifold_edge_count(mesh: TriangleMesh) -> int:
    """Number of undirected mesh edges shared by more than two triangles."""
    if not mesh.n_triangles:
        return 0
    t = mesh.triangles
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    e.sort(axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    return int(np.sum(counts > 2))
