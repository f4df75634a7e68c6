"""Grid, UDC field and triangle mesh types plus the index arithmetic shared by
the fitter and the extractor.

Conventions used throughout the package:

* Model space is the unit cube ``[-0.5, 0.5]^3``. Grid space maps it onto
  ``[0, X] x [0, Y] x [0, Z]``, so one grid unit is one cube.
* An edge is named by its axis (0, 1, 2 for x, y, z) and the integer node
  coordinates of its lower endpoint. An x-edge ``(i, j, k)`` is an *inside*
  edge when ``0 <= i < X``, ``1 <= j < Y`` and ``1 <= k < Z``; its flag lives at
  ``face_part[0][i, j - 1, k - 1]``.
* ``vertex_part`` has shape ``(3, X, Y, Z)``; the linear cube index used for
  ordering and on disk is ``x + X * (y + Y * z)`` (x fastest).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

AXES = (0, 1, 2)
AXIS_NAMES = ("x", "y", "z")
DEFAULT_VERTEX = (0.5, 0.5, 0.5)

Index3 = Tuple[int, int, int]


def _axis(axis) -> int:
    if isinstance(axis, str):
        try:
            return AXIS_NAMES.index(axis.lower())
        except ValueError:
            raise ValueError(f"unknown axis tag {axis!r}") from None
    axis = int(axis)
    if axis not in AXES:
        raise ValueError(f"unknown axis tag {axis!r}")
    return axis


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridSpec:
    """Regular grid of ``X * Y * Z`` cubes."""

    dims: Index3

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3:
            raise ValueError(f"grid needs three dimensions, got {self.dims!r}")
        if min(dims) < 2:
            raise ValueError(f"every grid dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def cubic(cls, res: int) -> "GridSpec":
        return cls((res, res, res))

    @property
    def node_count(self) -> int:
        X, Y, Z = self.dims
        return (X + 1) * (Y + 1) * (Z + 1)

    @property
    def cube_count(self) -> int:
        X, Y, Z = self.dims
        return X * Y * Z

    @property
    def edge_count(self) -> int:
        X, Y, Z = self.dims
        return X * (Y - 1) * (Z - 1) + (X - 1) * Y * (Z - 1) + (X - 1) * (Y - 1) * Z

    def face_shape(self, axis) -> Index3:
        """Shape of the flag field holding inside edges along ``axis``."""
        a = _axis(axis)
        return tuple(d if i == a else d - 1 for i, d in enumerate(self.dims))

    @property
    def face_shapes(self) -> Tuple[Index3, Index3, Index3]:
        return tuple(self.face_shape(a) for a in AXES)

    @property
    def vertex_shape(self) -> Tuple[int, int, int, int]:
        return (3,) + self.dims

    def is_inside_edge(self, axis, index) -> bool:
        a = _axis(axis)
        for i, (c, d) in enumerate(zip(index, self.dims)):
            lo, hi = (0, d - 1) if i == a else (1, d - 1)
            if not lo <= c <= hi:
                return False
        return True


def cardinalities(grid: GridSpec) -> Tuple[int, int, int]:
    """(node count, cube count, inside-edge count) of ``grid``."""
    return grid.node_count, grid.cube_count, grid.edge_count


# Offsets of the four cubes around an edge, in the two axes perpendicular to
# it taken in right-handed order (a+1, a+2). Walking this list is
# counter-clockwise when looking down the positive edge axis.
_RING = ((-1, -1), (0, -1), (0, 0), (-1, 0))


def ring_offsets(axis) -> np.ndarray:
    """(4, 3) integer offsets from an edge index to its four cubes."""
    a = _axis(axis)
    u, w = (a + 1) % 3, (a + 2) % 3
    out = np.zeros((4, 3), dtype=np.int64)
    for n, (du, dw) in enumerate(_RING):
        out[n, u] = du
        out[n, w] = dw
    return out


def edge_cube_neighbors(edge_axis, edge_index, grid: GridSpec) -> Tuple[Index3, ...]:
    """Four cubes sharing an inside edge, counter-clockwise about +axis.

    >>> edge_cube_neighbors("x", (0, 1, 1), GridSpec((2, 2, 2)))
    ((0, 0, 0), (0, 1, 0), (0, 1, 1), (0, 0, 1))
    """
    a = _axis(edge_axis)
    idx = tuple(int(c) for c in edge_index)
    if len(idx) != 3 or not grid.is_inside_edge(a, idx):
        raise IndexError(f"{AXIS_NAMES[a]}-edge {idx} is not an inside edge of {grid.dims}")
    base = np.asarray(idx)
    return tuple(tuple(int(c) for c in base + off) for off in ring_offsets(a))


def cube_linear_index(cubes: np.ndarray, dims: Index3) -> np.ndarray:
    """x-fastest linear index of integer cube coordinates, shape (..., 3)."""
    X, Y, _ = dims
    cubes = np.asarray(cubes, dtype=np.int64)
    return cubes[..., 0] + X * (cubes[..., 1] + Y * cubes[..., 2])


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Indexed triangle mesh. Arrays are copied and frozen on construction.

    Empty meshes (no vertices, no triangles) are allowed since extraction of an
    all-false UDC field produces one.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(v)):
            raise ValueError("mesh vertices must be finite")
        if t.size:
            if t.min() < 0 or t.max() >= len(v):
                raise ValueError("triangle index out of range")
            if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
                raise ValueError("triangle repeats a vertex index")
        object.__setattr__(self, "vertices", _readonly(v))
        object.__setattr__(self, "triangles", _readonly(t))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def __eq__(self, other):
        if not isinstance(other, TriangleMesh):
            return NotImplemented
        return (self.vertices.shape == other.vertices.shape
                and self.triangles.shape == other.triangles.shape
                and np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.triangles, other.triangles))

    def __hash__(self):
        return hash((self.vertices.tobytes(), self.triangles.tobytes()))

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        if not self.n_vertices:
            raise ValueError("empty mesh has no bounds")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


@dataclass(frozen=True, eq=False)
class UdcField:
    """Vertex part (relative coordinates per cube) and face part (one flag per
    inside edge, one boolean array per axis).

    ``vertex_part`` is held as float32, the precision of the on-disk format, so
    writing and re-reading a field never changes it.
    """

    grid: GridSpec
    vertex_part: np.ndarray
    face_part: Tuple[np.ndarray, np.ndarray, np.ndarray] = field(default=None)

    def __post_init__(self):
        grid = self.grid
        v = np.array(self.vertex_part, dtype=np.float32)
        if v.shape != grid.vertex_shape:
            raise ValueError(f"vertex_part shape {v.shape} != {grid.vertex_shape}")
        if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("vertex_part components must lie in [0, 1]")
        if self.face_part is None:
            faces = tuple(np.zeros(s, dtype=bool) for s in grid.face_shapes)
        else:
            if len(self.face_part) != 3:
                raise ValueError("face_part needs one field per axis")
            faces = tuple(np.array(f, dtype=bool) for f in self.face_part)
            for a, f in enumerate(faces):
                if f.shape != grid.face_shape(a):
                    raise ValueError(f"{AXIS_NAMES[a]}-flag shape {f.shape} != {grid.face_shape(a)}")
        object.__setattr__(self, "vertex_part", _readonly(v))
        object.__setattr__(self, "face_part", tuple(_readonly(f) for f in faces))

    @classmethod
    def empty(cls, grid: GridSpec) -> "UdcField":
        v = np.empty(grid.vertex_shape, dtype=np.float32)
        v[...] = np.asarray(DEFAULT_VERTEX, dtype=np.float32)[:, None, None, None]
        return cls(grid, v)

    @property
    def flags_true(self) -> int:
        return int(sum(int(f.sum()) for f in self.face_part))

    def __eq__(self, other):
        if not isinstance(other, UdcField):
            return NotImplemented
        return (self.grid == other.grid
                and np.array_equal(self.vertex_part, other.vertex_part)
                and all(np.array_equal(a, b) for a, b in zip(self.face_part, other.face_part)))

    __hash__ = None

    def padded_face_part(self) -> np.ndarray:
        """Flags scattered into a ``(3, X, Y, Z)`` array, zero elsewhere.

        Channel ``a`` holds the ``a``-axis flags at their edge index (lower
        node coordinates), so each flag sits at the cube whose minimum corner is
        the edge's lower endpoint.
        """
        out = np.zeros(self.grid.vertex_shape, dtype=bool)
        for a, f in enumerate(self.face_part):
            sl = tuple(slice(None) if i == a else slice(1, None) for i in AXES)
            out[(a,) + sl] = f
        return out
