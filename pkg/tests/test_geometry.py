import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from safecorridor import geometry
from safecorridor.geometry import GeometryError, Polyhedron

S2 = np.sqrt(0.5)
UNIT = Polyhedron.from_box((0, 0, 0), (1, 1, 1))


def cut_cube(gamma=1.5):
    """Unit cube with the x+y <= gamma corner bevel."""
    return Polyhedron(np.vstack([UNIT.normals, [S2, S2, 0]]), np.append(UNIT.offsets, gamma * S2))


def test_normals_are_normalised():
    p = Polyhedron(np.array([[2.0, 0, 0]]), np.array([4.0]))
    assert np.allclose(p.normals, [[1, 0, 0]]) and np.isclose(p.offsets[0], 2.0)
    with pytest.raises(GeometryError):
        Polyhedron(np.zeros((1, 3)), np.zeros(1))


def test_contains_point():
    assert geometry.contains_point(UNIT, (0.5, 0.5, 0.5))
    assert not geometry.contains_point(UNIT, (2.0, 0.5, 0.5))
    assert geometry.contains_point(UNIT, (1.0, 0.5, 0.5), tol=0.0)
    assert not geometry.contains_point(UNIT, (1.0 + 1e-6, 0.5, 0.5), tol=1e-9)


def test_box_intersects():
    assert geometry.box_intersects(UNIT, (0.2, 0.2, 0.2), (0.4, 0.4, 0.4))
    assert not geometry.box_intersects(UNIT, (1.5, 0, 0), (2, 1, 1))
    # face contact counts under closed semantics but not with a margin
    assert geometry.box_intersects(UNIT, (1, 0, 0), (2, 1, 1))
    assert not geometry.box_intersects(UNIT, (1, 0, 0), (2, 1, 1), margin=1e-9)


def test_box_touching_bevel_at_a_corner():
    p = cut_cube()
    lo, hi = (0.75, 0.75, 0.0), (1.0, 1.0, 1.0)
    assert geometry.box_intersects(p, lo, hi)
    assert not geometry.box_intersects(p, lo, hi, margin=1e-9)
    # the oracle agrees: the point (0.75, 0.75, z) satisfies both sets
    assert geometry.contains_point(p, (0.75, 0.75, 0.5), tol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-0.5, 1.5), min_size=6, max_size=6))
def test_box_intersects_matches_sampling(c):
    lo = np.minimum(c[:3], c[3:])
    hi = np.maximum(c[:3], c[3:]) + 0.05
    p = cut_cube()
    grid = np.stack(np.meshgrid(*[np.linspace(lo[k], hi[k], 9) for k in range(3)]), -1).reshape(-1, 3)
    sampled = geometry.contains_points(p, grid, tol=1e-12).any()
    if sampled:
        assert geometry.box_intersects(p, lo, hi)
    if not geometry.box_intersects(p, lo, hi):
        assert not sampled


def test_feasibility():
    a = Polyhedron.from_box((0, 0, 0), (1, 1, 1))
    assert geometry.polyhedra_intersect_feasibility(a, a)
    assert not geometry.polyhedra_intersect_feasibility(a, Polyhedron.from_box((2, 0, 0), (3, 1, 1)))
    assert geometry.polyhedra_intersect_feasibility(
        Polyhedron.from_box((0, 0, 0), (2, 1, 1)), Polyhedron.from_box((1, 0, 0), (3, 1, 1)))
    # shared face only: no common interior
    assert not geometry.polyhedra_intersect_feasibility(a, Polyhedron.from_box((1, 0, 0), (2, 1, 1)))


def test_feasibility_rejects_empty_input():
    empty = Polyhedron.from_box((0, 0, 0), (1, 1, 1))
    empty = Polyhedron(np.vstack([empty.normals, [-1, 0, 0]]), np.append(empty.offsets, -2.0))
    with pytest.raises(GeometryError):
        geometry.polyhedra_intersect_feasibility(empty, UNIT)


def test_vertices_of_cube_and_cut_cube():
    assert len(geometry.enumerate_vertices(UNIT)) == 8
    v = geometry.enumerate_vertices(cut_cube())
    assert len(v) == 10
    # brute force over all plane triples
    p = cut_cube()
    brute = []
    for t in itertools.combinations(range(len(p.offsets)), 3):
        A = p.normals[list(t)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, p.offsets[list(t)])
        if geometry.contains_point(p, x, tol=1e-9) and not any(np.allclose(x, y) for y in brute):
            brute.append(x)
    assert len(brute) == 10
    assert all(any(np.allclose(x, y) for y in v) for x in brute)


def test_unbounded_and_small_inputs():
    with pytest.raises(GeometryError):
        geometry.enumerate_vertices(Polyhedron(np.eye(3)[:1], np.ones(1)))
    half = Polyhedron(np.vstack([np.eye(3), [[-1, 0, 0]]]), np.ones(4))
    with pytest.raises(GeometryError):
        geometry.enumerate_vertices(half)


def test_remove_redundant():
    extra = Polyhedron(np.vstack([UNIT.normals, [1, 0, 0], [S2, S2, 0]]), np.append(UNIT.offsets, [3.0, 5.0]))
    assert geometry.remove_redundant(extra).n_constraints == 6
    assert geometry.remove_redundant(cut_cube()).n_constraints == 7


def test_face_polygons_wind_outward():
    p = cut_cube()
    v = geometry.enumerate_vertices(p)
    faces = geometry.face_polygons(p, v)
    assert len(faces) == 7
    centre = v.mean(axis=0)
    for f in faces:
        a, b, c = v[f[0]], v[f[1]], v[f[2]]
        n = np.cross(b - a, c - a)
        assert np.dot(n, a - centre) > 0


def test_polyhedron_volume():
    assert geometry.polyhedron_volume(UNIT) == pytest.approx(1.0)
    assert geometry.polyhedron_volume(cut_cube()) == pytest.approx(1 - 0.125)


def test_union_volume():
    cube = Polyhedron.from_box((0, 0, 0), (3.9, 3.9, 3.9))
    assert abs(geometry.union_volume([cube], 0.1) - 59.319) <= 2.0
    assert geometry.union_volume([cube, cube], 0.1) == geometry.union_volume([cube], 0.1)
    assert geometry.union_volume([], 0.1) == 0.0
    a = Polyhedron.from_box((0, 0, 0), (1, 1, 1))
    b = Polyhedron.from_box((0.5, 0, 0), (1.5, 1, 1))
    assert geometry.union_volume([a, b], 0.05) == pytest.approx(1.5, abs=0.2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)), min_size=4, max_size=12))
def test_vertices_match_hull_of_random_cuts(normals):
    n = np.array([v for v in normals if np.linalg.norm(v) > 0.1])
    if len(n) == 0:
        return
    n = n / np.linalg.norm(n, axis=1, keepdims=True)
    p = Polyhedron(np.vstack([UNIT.normals, n]), np.append(UNIT.offsets, n @ [0.5, 0.5, 0.5] + 0.3))
    v = geometry.enumerate_vertices(p)
    assert geometry.contains_points(p, v, tol=1e-7).all()
    hull = ConvexHull(v)
    assert hull.volume == pytest.approx(geometry.polyhedron_volume(p))


def test_json_round_trip():
    p = cut_cube()
    q = Polyhedron.from_json(p.to_json())
    assert np.allclose(p.normals, q.normals) and np.allclose(p.offsets, q.offsets)
