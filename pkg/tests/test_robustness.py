import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resilient_voronoi.errors import DomainError
from resilient_voronoi.graph import CommGraph, graph_from_positions
from resilient_voronoi.robustness import (GraphTooLarge, InvalidSubset, SubsetPair, is_r_robust,
                                          is_rs_robust, max_equal_rs, total_pairs, violates, x_set)
from resilient_voronoi.study import TwoLines, generate_formation

from oracles import naive_rs_robust, random_graph


def path_graph(n):
    return CommGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def test_x_set_examples():
    k5 = CommGraph.complete(5)
    assert x_set(k5, {0, 1}, 0) == {0, 1}
    assert x_set(k5, {0, 1}, 3) == {0, 1}
    g = graph_from_positions(generate_formation(TwoLines(11)))
    assert x_set(g, {0}, 3) == frozenset()
    with pytest.raises(InvalidSubset):
        x_set(k5, {7}, 1)


def test_subset_pair_validation():
    with pytest.raises(InvalidSubset):
        SubsetPair(set(), {1})
    with pytest.raises(InvalidSubset):
        SubsetPair({1, 2}, {2})


def test_k4_three_three_witness():
    rep = is_rs_robust(CommGraph.complete(4), 3, 3)
    assert not rep.robust
    assert len(rep.witness.s1) == 2 and len(rep.witness.s2) == 2
    assert violates(CommGraph.complete(4), rep.witness, 3, 3)
    # first 2/2 split in labeling order: vertex 0 with 3 in S1
    assert rep.witness == SubsetPair({0, 3}, {1, 2})


def test_every_two_two_split_of_k4_violates():
    k4 = CommGraph.complete(4)
    for a in itertools.combinations(range(4), 2):
        b = set(range(4)) - set(a)
        assert violates(k4, SubsetPair(a, b), 3, 3)


@pytest.mark.parametrize("seed", range(10))
def test_connected_graphs_are_one_one_robust(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    # random spanning tree plus extra edges keeps the graph connected
    edges = {(int(rng.integers(0, v)), v) for v in range(1, n)} | random_graph(rng, n, 0.3)
    assert is_rs_robust(CommGraph.from_edges(n, edges), 1, 1).robust


def test_two_lines_k1_not_three_three():
    g = graph_from_positions(generate_formation(TwoLines(11)))
    assert not is_rs_robust(g, 3, 3).robust
    assert is_rs_robust(g, 2, 2).robust


def test_max_equal_rs_examples():
    assert max_equal_rs(CommGraph.complete(11)) == 6
    pts = generate_formation(TwoLines(11))
    assert [max_equal_rs(graph_from_positions(pts, K)) for K in range(1, 6)] == [2, 3, 4, 5, 6]
    assert max_equal_rs(CommGraph.from_edges(4, [(0, 1), (2, 3)])) == 0


def test_is_r_robust_examples():
    assert is_r_robust(CommGraph.complete(3), 2)
    assert not is_r_robust(path_graph(4), 2)


def test_cap_and_argument_checks():
    with pytest.raises(GraphTooLarge):
        is_rs_robust(CommGraph.complete(17), 1, 1)
    assert is_rs_robust(CommGraph.complete(5), 1, 1, cap=5).robust
    with pytest.raises(GraphTooLarge):
        is_rs_robust(CommGraph.complete(6), 1, 1, cap=5)
    with pytest.raises(DomainError):
        is_rs_robust(CommGraph.complete(4), 0, 1)


def test_pairs_checked_counts():
    for n in range(2, 8):
        rep = is_rs_robust(CommGraph.complete(n), 1, 1)
        assert rep.robust and rep.pairs_checked == total_pairs(n)
    # brute-force count of unordered pairs for a small n
    n = 5
    pairs = set()
    for labels in itertools.product((0, 1, 2), repeat=n):
        s1 = frozenset(v for v in range(n) if labels[v] == 1)
        s2 = frozenset(v for v in range(n) if labels[v] == 2)
        if s1 and s2:
            pairs.add(frozenset((s1, s2)))
    assert len(pairs) == total_pairs(n)
    assert is_rs_robust(CommGraph.complete(4), 3, 3).pairs_checked == 12


def test_audit_scans_everything():
    rep = is_rs_robust(CommGraph.complete(4), 3, 3, audit=True)
    assert not rep.robust and rep.pairs_checked == total_pairs(4)
    assert rep.witness == is_rs_robust(CommGraph.complete(4), 3, 3).witness


def test_workers_give_identical_reports():
    rng = np.random.default_rng(11)
    for _ in range(5):
        g = CommGraph.from_edges(14, random_graph(rng, 14, 0.5))
        for r in (1, 2, 3):
            assert is_rs_robust(g, r, r, workers=3) == is_rs_robust(g, r, r)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 7), st.floats(0.1, 0.9), st.integers(0, 2 ** 32 - 1),
       st.integers(1, 4), st.integers(1, 4))
def test_agrees_with_naive_checker(n, p, seed, r, s):
    edges = random_graph(np.random.default_rng(seed), n, p)
    g = CommGraph.from_edges(n, edges)
    rep = is_rs_robust(g, r, s)
    assert rep.robust == naive_rs_robust(n, edges, r, s)
    if not rep.robust:
        assert violates(g, rep.witness, r, s)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.floats(0.2, 0.9), st.integers(0, 2 ** 32 - 1))
def test_downward_closure(n, p, seed):
    g = CommGraph.from_edges(n, random_graph(np.random.default_rng(seed), n, p))
    for r in range(2, 5):
        for s in range(2, 5):
            if is_rs_robust(g, r, s).robust:
                for l in range(1, min(r, s)):
                    assert is_rs_robust(g, r - l, s - l).robust


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 12), st.integers(0, 2 ** 32 - 1))
def test_robustness_floor_on_random_positions(n, seed):
    pts = np.random.default_rng(seed).uniform(0, 10, (n, 2))
    assert is_rs_robust(graph_from_positions(pts, 1), 2, 2).robust
    assert is_rs_robust(graph_from_positions(pts, 2), 3, 3).robust
    assert is_r_robust(graph_from_positions(pts, 2), 3)


@pytest.mark.parametrize("tie_break", ["min", "max"])
def test_robustness_floor_on_grid_under_both_diagonals(tie_break):
    r, c = np.divmod(np.arange(12), 4)
    pts = np.c_[c, r].astype(float)
    assert is_rs_robust(graph_from_positions(pts, 1, tie_break), 2, 2).robust
    assert is_rs_robust(graph_from_positions(pts, 2, tie_break), 3, 3).robust
