"""Procedural meshes for fixtures and benchmarks."""
from __future__ import annotations

import numpy as np

from .core import TriangleMesh


def box(lo=(-0.5, -0.5, -0.5), hi=(0.5, 0.5, 0.5)) -> TriangleMesh:
    """Axis-aligned box, 8 vertices and 12 triangles."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    corners = np.array([[(hi if (n >> a) & 1 else lo)[a] for a in range(3)] for n in range(8)])
    quads = [(0, 2, 3, 1), (4, 5, 7, 6), (0, 1, 5, 4), (2, 6, 7, 3), (0, 4, 6, 2), (1, 3, 7, 5)]
    tris = [t for a, b, c, d in quads for t in ((a, b, c), (a, c, d))]
    return TriangleMesh(corners, np.array(tris))


def _cube_grid(segments: int):
    """Subdivided surface of [-1, 1]^3 with ``segments`` quads per face edge,
    welded along the cube edges."""
    s = np.linspace(-1.0, 1.0, segments + 1)
    uu, vv = np.meshgrid(s, s, indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    one = np.ones_like(uu)
    faces = [
        np.stack([one, uu, vv], 1), np.stack([-one, vv, uu], 1),
        np.stack([vv, one, uu], 1), np.stack([uu, -one, vv], 1),
        np.stack([uu, vv, one], 1), np.stack([vv, uu, -one], 1),
    ]
    n = segments + 1
    tris = []
    for f in range(6):
        base = f * n * n
        i, j = np.meshgrid(np.arange(segments), np.arange(segments), indexing="ij")
        a = base + i * n + j
        b, c, d = a + n, a + n + 1, a + 1
        tris.append(np.stack([a, b, c], -1).reshape(-1, 3))
        tris.append(np.stack([a, c, d], -1).reshape(-1, 3))
    pts = np.concatenate(faces)
    tris = np.concatenate(tris)
    key = np.round(pts * segments).astype(np.int64)
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    return pts[first], inverse.reshape(-1)[tris]


def cube_sphere(radius: float = 0.4, segments: int = 16, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Sphere made by projecting a subdivided cube; ``12 * segments**2`` triangles."""
    pts, tris = _cube_grid(segments)
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    return TriangleMesh(pts * radius + np.asarray(center), tris)


def rounded_box(half_size=(0.35, 0.3, 0.25), radius: float = 0.08, segments: int = 24) -> TriangleMesh:
    """Box with rounded edges and corners; outer half extents ``half_size``."""
    half = np.asarray(half_size, dtype=np.float64)
    inner = half - radius
    if np.any(inner < 0):
        raise ValueError("radius exceeds the box half size")
    pts, tris = _cube_grid(segments)
    p = pts * half
    q = np.clip(p, -inner, inner)
    d = p - q
    n = np.linalg.norm(d, axis=1, keepdims=True)
    return TriangleMesh(q + radius * d / n, tris)


def square_sheet(axis: int, offset: float, half: float = 0.45) -> TriangleMesh:
    """Two-triangle square perpendicular to ``axis`` at ``offset``."""
    u, w = (axis + 1) % 3, (axis + 2) % 3
    v = np.zeros((4, 3))
    v[:, axis] = offset
    v[:, u] = [-half, half, half, -half]
    v[:, w] = [-half, -half, half, half]
    return TriangleMesh(v, [(0, 1, 2), (0, 2, 3)])
