import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import Delaunay as QhullDelaunay

from resilient_voronoi.errors import FormatError, InvalidVertex
from resilient_voronoi.geometry import (CollinearInput, DuplicatePoints, TooFewPoints, delaunay,
                                        incircle, orient, read_positions, vertex_neighbor_ring,
                                        write_positions, write_triangles)
from resilient_voronoi.study import TwoLines, generate_formation


def circumcircle_clear(tri, tol=1e-9):
    pts = tri.points
    for a, b, c in tri.triangles:
        for d in range(tri.n_points):
            if d not in (a, b, c) and incircle(pts[a], pts[b], pts[c], pts[d]) > 0:
                return False
    return True


def check_invariants(tri):
    pts = tri.points
    V, H = tri.n_points, len(tri.hull)
    for a, b, c in tri.triangles:
        assert orient(pts[a], pts[b], pts[c]) > 0
    assert circumcircle_clear(tri)
    assert len(tri.edges) == 3 * V - 3 - H
    assert min(tri.degree(v) for v in range(V)) >= 2
    hull = set(tri.hull)
    for v in range(V):
        ring = vertex_neighbor_ring(tri, v)
        assert set(ring.vertices) == set(tri.adjacency[v])
        assert ring.is_cycle == (v not in hull)
        # consecutive ring members are joined by a triangulation edge
        steps = list(zip(ring.vertices, ring.vertices[1:]))
        if ring.is_cycle:
            steps.append((ring.vertices[-1], ring.vertices[0]))
        for u, w in steps:
            assert w in tri.adjacency[u]


def test_single_triangle():
    tri = delaunay([(0, 0), (1, 0), (0, 1)])
    assert len(tri.triangles) == 1
    assert len(tri.edges) == 3


@pytest.mark.parametrize("tie_break", ["min", "max"])
def test_unit_square_has_one_diagonal(tie_break):
    tri = delaunay([(0, 0), (1, 0), (1, 1), (0, 1)], tie_break=tie_break)
    assert len(tri.triangles) == 2
    assert len(tri.edges) == 5
    diagonal = {(0, 2), (1, 3)} & set(tri.edges)
    assert diagonal == ({(0, 2)} if tie_break == "min" else {(1, 3)})
    check_invariants(tri)


def test_two_lines_strip_edges():
    tri = delaunay(generate_formation(TwoLines(11)))
    assert len(tri.edges) == 19


def test_errors():
    with pytest.raises(TooFewPoints):
        delaunay([(0, 0), (1, 1)])
    with pytest.raises(CollinearInput):
        delaunay([(0, 0), (1, 1), (2, 2), (3, 3)])
    with pytest.raises(DuplicatePoints):
        delaunay([(0, 0), (1, 0), (0, 1), (1e-14, 0)])
    with pytest.raises(ValueError):
        delaunay([(0, 0), (1, np.nan), (0, 1)])


def test_plus_center_ring_is_four_cycle():
    tri = delaunay([(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)])
    ring = vertex_neighbor_ring(tri, 0)
    assert ring.is_cycle and len(ring.vertices) == 4


def test_square_corner_ring_depends_on_diagonal():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    lo, hi = delaunay(pts, "min"), delaunay(pts, "max")
    assert len(vertex_neighbor_ring(lo, 0).vertices) == 3
    assert len(vertex_neighbor_ring(hi, 0).vertices) == 2
    assert not vertex_neighbor_ring(lo, 0).is_cycle


def test_triangle_ring_is_path_of_two():
    tri = delaunay([(0, 0), (1, 0), (0, 1)])
    for v in range(3):
        ring = vertex_neighbor_ring(tri, v)
        assert len(ring.vertices) == 2 and not ring.is_cycle
    with pytest.raises(InvalidVertex):
        vertex_neighbor_ring(tri, 3)


def test_hull_is_ccw_from_smallest_index():
    rng = np.random.default_rng(4)
    tri = delaunay(rng.uniform(0, 1, (30, 2)))
    assert tri.hull[0] == min(tri.hull)
    pts = tri.points[list(tri.hull)]
    area = 0.5 * np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1])
    assert area > 0


@pytest.mark.parametrize("seed", range(40))
def test_edges_match_qhull(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-5, 5, (int(rng.integers(3, 60)), 2))
    ours = set(delaunay(pts).edges)
    theirs = set()
    for simplex in QhullDelaunay(pts).simplices:
        for u, v in itertools.combinations(sorted(simplex), 2):
            theirs.add((int(u), int(v)))
    assert ours == theirs


# integer coordinates keep every predicate exact in double precision; features
# far below the tolerance bands (e.g. 1e-16 off a line) are out of scope
coords = st.integers(min_value=-1000, max_value=1000).map(float)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(coords, coords), min_size=3, max_size=50, unique=True))
def test_invariants_hold_for_arbitrary_points(points):
    try:
        tri = delaunay(points)
    except (CollinearInput, DuplicatePoints):
        return
    check_invariants(tri)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 50), st.integers(0, 2 ** 32 - 1))
def test_invariants_and_determinism_random(n, seed):
    pts = np.random.default_rng(seed).uniform(0, 10, (n, 2))
    tri = delaunay(pts)
    check_invariants(tri)
    assert delaunay(pts).triangles == tri.triangles


@pytest.mark.parametrize("tie_break", ["min", "max"])
def test_grid_formation_invariants_either_diagonal(tie_break):
    r, c = np.divmod(np.arange(16), 4)
    check_invariants(delaunay(np.c_[c, r], tie_break))


def test_orient_and_incircle_signs():
    assert orient((0, 0), (1, 0), (0, 1)) == 1
    assert orient((0, 0), (0, 1), (1, 0)) == -1
    assert orient((0, 0), (1, 1), (2, 2)) == 0
    assert incircle((0, 0), (1, 0), (0, 1), (0.2, 0.2)) == 1
    assert incircle((0, 0), (1, 0), (0, 1), (5, 5)) == -1
    assert incircle((0, 0), (1, 0), (1, 1), (0, 1)) == 0


def test_positions_roundtrip(tmp_path):
    pts = np.random.default_rng(0).uniform(0, 1, (7, 2))
    path = tmp_path / "pos.csv"
    write_positions(path, pts)
    ids, back = read_positions(path)
    assert ids == [str(i) for i in range(7)] or list(map(int, ids)) == list(range(7))
    assert np.array_equal(back, pts)


def test_positions_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,x,y\n0,0,0\n1,oops,2\n")
    with pytest.raises(FormatError) as err:
        read_positions(path)
    assert err.value.line == 3
    path.write_text("name,x,y\n")
    with pytest.raises(FormatError):
        read_positions(path)


def test_triangle_export(tmp_path):
    tri = delaunay([(0, 0), (1, 0), (1, 1), (0, 1)])
    path = tmp_path / "tri.csv"
    write_triangles(path, tri)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("triangle,a,b,c")
    assert len(lines) == 3
