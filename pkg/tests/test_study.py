import numpy as np
import pytest

from resilient_voronoi.errors import DomainError
from resilient_voronoi.graph import graph_from_positions
from resilient_voronoi.study import (Circle, Grid, HollowSquare, RandomRect, TwoLines,
                                     formation_from_dict, generate_formation, random_specs,
                                     run_robustness_study)


def test_two_lines_coordinates():
    pts = generate_formation(TwoLines(11))
    bottom = pts[pts[:, 1] == 0]
    top = pts[pts[:, 1] == 1]
    assert bottom[:, 0].tolist() == [0, 2, 4, 6, 8, 10]
    assert top[:, 0].tolist() == [1, 3, 5, 7, 9]
    assert graph_from_positions(pts).n_edges == 19


def test_circle_and_grid():
    pts = generate_formation(Circle(20, scale=2.0))
    assert len(pts) == 20
    assert np.allclose(np.hypot(*pts.T), 2.0)
    assert len(generate_formation(Grid(3, 3))) == 9
    sq = generate_formation(HollowSquare(4))
    assert len(sq) == 12 and len({tuple(p) for p in sq}) == 12


def test_random_rect_is_seeded_and_bounded():
    a = generate_formation(RandomRect(10, seed=5))
    b = generate_formation(RandomRect(10, seed=5))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, generate_formation(RandomRect(10, seed=6)))
    w, h = a.max(axis=0)
    assert w * h <= 100.0 + 1e-9


def test_formation_validation():
    with pytest.raises(DomainError):
        generate_formation(TwoLines(2))
    with pytest.raises(DomainError):
        generate_formation(RandomRect(8, aspect_range=(0.5, 2.0)))
    with pytest.raises(DomainError):
        formation_from_dict({"kind": "spiral"})
    assert formation_from_dict({"kind": "grid", "rows": 2, "cols": 3}) == Grid(2, 3)


def test_random_specs_cover_size_range():
    specs = random_specs(200, 0)
    assert {s.n for s in specs} == set(range(8, 13))
    assert specs == random_specs(200, 0)


def test_two_lines_table():
    rep = run_robustness_study([TwoLines(11)], 8)
    assert [s.edges for s in rep.samples] == [19, 34, 45, 52, 55, 55, 55, 55]
    assert [s.max_rs for s in rep.samples] == [2, 3, 4, 5, 6, 6, 6, 6]
    assert [s.complete for s in rep.samples] == [False] * 4 + [True] * 4


def test_random_study_guaranteed_rows(tmp_path):
    rep = run_robustness_study(random_specs(30, 1), 3)
    pct = rep.percentages()
    assert pct[(1, 2)] == 100.0
    assert pct[(2, 3)] == 100.0
    assert rep.minimum(1) >= 2 and rep.minimum(2) >= 3
    for K in rep.ks:
        values = [pct.get((K, r), 0.0) for r in range(1, 8)]
        assert all(0 <= v <= 100 for v in values)
        assert values == sorted(values, reverse=True)
    assert all(s.K >= 3 for s in rep.below_conjecture())
    paths = rep.write(tmp_path)
    assert [p.name for p in paths] == ["study_samples.csv", "study_table.csv"]
    assert len(paths[0].read_text().splitlines()) == 1 + 30 * 3
    assert rep.write(tmp_path, "json")[0].exists()
