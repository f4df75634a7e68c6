"""OBJ reading and writing, mesh normalization and surface point sampling."""
from __future__ import annotations

import io
from pathlib import Path
from typing import Union

import numpy as np

from .core import TriangleMesh
from .errors import DegenerateInputError, ObjParseError

# Point clouds are plain (N, 3) float64 arrays.
PointCloud = np.ndarray

#: Bit generator used for every seeded draw in the package.
RNG_ALGORITHM = "numpy.PCG64"


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; ``seed`` is an int or a sequence of ints."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def as_point_cloud(points) -> PointCloud:
    p = np.asarray(points, dtype=np.float64)
    if p.size == 0:
        return np.zeros((0, 3))
    if p.ndim != 2 or p.shape[1] != 3:
        raise ValueError(f"point cloud must have shape (N, 3), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point cloud has non-finite coordinates")
    return p


def _resolve(token: str, n_vertices: int, lineno: int) -> int:
    ref = token.split("/", 1)[0]
    try:
        i = int(ref)
    except ValueError:
        raise ObjParseError(f"bad face index {token!r}", lineno) from None
    if i > 0:
        idx = i - 1
    elif i < 0:
        idx = n_vertices + i
    else:
        raise ObjParseError("face index 0 is invalid", lineno)
    if not 0 <= idx < n_vertices:
        raise ObjParseError(f"face index {i} out of range ({n_vertices} vertices)", lineno)
    return idx


def parse_obj(data: Union[bytes, str]) -> TriangleMesh:
    """Parse the ``v``/``f`` subset of Wavefront OBJ.

    Polygons are fan-triangulated from their first corner. Negative indices
    are relative to the vertices read so far.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    vertices, triangles = [], []
    for lineno, line in enumerate(data.splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ObjParseError("vertex needs three coordinates", lineno)
            try:
                vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError:
                raise ObjParseError(f"bad vertex {line.strip()!r}", lineno) from None
        elif tag == "f":
            idx = [_resolve(tok, len(vertices), lineno) for tok in parts[1:]]
            if len(idx) < 3:
                raise ObjParseError("face needs at least three vertices", lineno)
            for n in range(1, len(idx) - 1):
                tri = (idx[0], idx[n], idx[n + 1])
                if len(set(tri)) < 3:
                    raise ObjParseError(f"degenerate face {line.strip()!r}", lineno)
                triangles.append(tri)
    if not triangles:
        raise ObjParseError("empty mesh")
    return TriangleMesh(np.array(vertices), np.array(triangles))


def write_obj(mesh: TriangleMesh) -> bytes:
    # repr() of a float64 is the shortest string that round-trips exactly.
    buf = io.StringIO()
    for x, y, z in mesh.vertices.tolist():
        buf.write(f"v {x!r} {y!r} {z!r}\n")
    for a, b, c in (mesh.triangles + 1).tolist():
        buf.write(f"f {a} {b} {c}\n")
    return buf.getvalue().encode("utf-8")


def read_obj(path) -> TriangleMesh:
    return parse_obj(Path(path).read_bytes())


def save_obj(mesh: TriangleMesh, path) -> None:
    Path(path).write_bytes(write_obj(mesh))


def normalize_mesh(mesh: TriangleMesh, half_extent: float = 0.5) -> TriangleMesh:
    """Center the bounding box at the origin and scale uniformly so that its
    longest side is ``2 * half_extent``."""
    if half_extent <= 0:
        raise ValueError("half_extent must be positive")
    if not mesh.n_vertices:
        raise DegenerateInputError("cannot normalize an empty mesh")
    lo, hi = mesh.bounds()
    longest = float(np.max(hi - lo))
    if longest <= 0:
        raise DegenerateInputError("mesh has zero extent")
    center = (lo + hi) / 2
    scale = 2.0 * half_extent / longest
    return TriangleMesh((mesh.vertices - center) * scale, mesh.triangles)


def sample_surface(mesh: TriangleMesh, n: int, seed) -> PointCloud:
    """Draw ``n`` points uniformly by area: a triangle is picked with
    probability proportional to its area, then a point uniformly inside it."""
    if n < 0:
        raise ValueError("sample count must be non-negative")
    areas = mesh.triangle_areas() if mesh.n_triangles else np.zeros(0)
    total = float(areas.sum())
    if not total > 0:
        raise DegenerateInputError("mesh has zero surface area")
    if n == 0:
        return np.zeros((0, 3))
    rng = make_rng(seed)
    cdf = np.cumsum(areas) / total
    tri = np.searchsorted(cdf, rng.random(n), side="right")
    tri = np.minimum(tri, len(areas) - 1)
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    p = mesh.vertices[mesh.triangles[tri]]
    w0 = 1.0 - r1
    w1 = r1 * (1.0 - r2)
    w2 = r1 * r2
    return w0[:, None] * p[:, 0] + w1[:, None] * p[:, 1] + w2[:, None] * p[:, 2]
