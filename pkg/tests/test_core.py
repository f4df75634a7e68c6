import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from udckit.core import (GridSpec, TriangleMesh, UdcField, cardinalities, cube_linear_index,
                         edge_cube_neighbors)

dims_st = st.tuples(*(st.integers(2, 9),) * 3)


@pytest.mark.parametrize("dims, expected", [
    ((64, 64, 64), (274625, 262144, 762048)),
    ((2, 2, 2), (27, 8, 6)),
])
def test_cardinalities(dims, expected):
    assert cardinalities(GridSpec(dims)) == expected


@pytest.mark.parametrize("dims", [(2, 2, 1), (1, 5, 5), (0, 3, 3), (3, 3)])
def test_grid_rejects_small_or_malformed(dims):
    with pytest.raises(ValueError):
        GridSpec(dims)


@given(dims_st)
def test_face_shapes_sum_to_edge_count(dims):
    g = GridSpec(dims)
    assert sum(int(np.prod(s)) for s in g.face_shapes) == g.edge_count


def test_neighbors_hand_enumerated():
    got = edge_cube_neighbors("x", (0, 1, 1), GridSpec((2, 2, 2)))
    assert got == ((0, 0, 0), (0, 1, 0), (0, 1, 1), (0, 0, 1))


def test_neighbors_boundary_edge_rejected():
    with pytest.raises(IndexError):
        edge_cube_neighbors("x", (0, 0, 0), GridSpec((2, 2, 2)))
    with pytest.raises(IndexError):
        edge_cube_neighbors(2, (1, 1, 2), GridSpec((2, 2, 2)))


def _edges(dims):
    for axis in range(3):
        ranges = [range(d) if i == axis else range(1, d) for i, d in enumerate(dims)]
        for idx in itertools.product(*ranges):
            yield axis, idx


@given(dims_st)
def test_neighbors_in_range_and_ccw(dims):
    g = GridSpec(dims)
    for axis, idx in _edges(dims):
        cubes = np.array(edge_cube_neighbors(axis, idx, g))
        assert np.all(cubes >= 0) and np.all(cubes < np.array(dims))
        assert np.all(cubes[:, axis] == idx[axis])
        # cube centres projected on the plane normal to the edge go round it
        # counter-clockwise when looking down +axis
        u, w = (axis + 1) % 3, (axis + 2) % 3
        c = cubes[:, [u, w]] + 0.5 - np.array([idx[u], idx[w]])
        for n in range(4):
            a, b = c[n], c[(n + 1) % 4]
            assert a[0] * b[1] - a[1] * b[0] > 0


@given(dims_st)
def test_each_cube_has_its_inside_edges(dims):
    g = GridSpec(dims)
    seen = {}
    for axis, idx in _edges(dims):
        for cube in edge_cube_neighbors(axis, idx, g):
            seen.setdefault(cube, set()).add((axis, idx))
    for cube in itertools.product(*(range(d) for d in dims)):
        expected = set()
        for axis in range(3):
            u, w = (axis + 1) % 3, (axis + 2) % 3
            for du, dw in itertools.product((0, 1), repeat=2):
                e = list(cube)
                e[u] += du
                e[w] += dw
                if g.is_inside_edge(axis, e):
                    expected.add((axis, tuple(e)))
        assert seen.get(cube, set()) == expected
        assert len(expected) <= 12


def test_udc_field_rejects_out_of_range_vertex():
    g = GridSpec((2, 2, 2))
    v = np.full(g.vertex_shape, 0.5)
    v[1, 0, 1, 0] = 1.01
    with pytest.raises(ValueError):
        UdcField(g, v)
    v[1, 0, 1, 0] = -1e-6
    with pytest.raises(ValueError):
        UdcField(g, v)


def test_udc_field_shape_checks():
    g = GridSpec((3, 4, 5))
    with pytest.raises(ValueError):
        UdcField(g, np.full((3, 3, 4, 4), 0.5))
    faces = [np.zeros(s, bool) for s in g.face_shapes]
    faces[1] = np.zeros((3, 4, 5), bool)
    with pytest.raises(ValueError):
        UdcField(g, np.full(g.vertex_shape, 0.5), faces)


def test_empty_field_defaults():
    u = UdcField.empty(GridSpec((3, 4, 5)))
    assert u.flags_true == 0
    assert np.all(u.vertex_part == 0.5)
    assert u.vertex_part.dtype == np.float32


def test_fields_are_immutable():
    u = UdcField.empty(GridSpec((2, 2, 2)))
    with pytest.raises(ValueError):
        u.vertex_part[0, 0, 0, 0] = 0.1
    with pytest.raises(ValueError):
        u.face_part[0][0, 0, 0] = True


def test_padded_face_part_places_flags_at_edge_index():
    g = GridSpec((3, 4, 5))
    faces = [np.zeros(s, bool) for s in g.face_shapes]
    faces[0][2, 0, 3] = True  # x-edge (2, 1, 4)
    faces[2][1, 2, 4] = True  # z-edge (2, 3, 4)
    pad = UdcField(g, np.full(g.vertex_shape, 0.5), faces).padded_face_part()
    assert pad.shape == (3, 3, 4, 5)
    assert pad.sum() == 2
    assert pad[0, 2, 1, 4] and pad[2, 2, 3, 4]


def test_cube_linear_index_is_x_fastest():
    dims = (3, 4, 5)
    assert cube_linear_index([1, 0, 0], dims) == 1
    assert cube_linear_index([0, 1, 0], dims) == 3
    assert cube_linear_index([0, 0, 1], dims) == 12


def test_mesh_validation():
    with pytest.raises(ValueError):
        TriangleMesh(np.zeros((3, 3)), [(0, 1, 3)])
    with pytest.raises(ValueError):
        TriangleMesh(np.eye(3), [(0, 1, 1)])
    with pytest.raises(ValueError):
        TriangleMesh([[0, 0, np.nan], [1, 0, 0], [0, 1, 0]], [(0, 1, 2)])
    empty = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), int))
    assert empty.n_vertices == 0 and empty.n_triangles == 0
