"""Measure how robust the communication graph is.

A graph is (r, s)-robust when, for any two disjoint groups of agents, enough
agents in one group hear from at least r outsiders. The checker enumerates
every pair of groups, so it is exact but limited to small teams.
"""
from resilient_voronoi.graph import CommGraph, graph_from_positions
from resilient_voronoi.robustness import is_rs_robust, max_equal_rs
from resilient_voronoi.study import RandomRect, generate_formation

points = generate_formation(RandomRect(10, seed=3))
for K in (1, 2, 3):
    g = graph_from_positions(points, K=K)
    print(f"K={K}: {g.n_edges} edges, largest r with (r, r)-robustness = {max_equal_rs(g)}")

report = is_rs_robust(CommGraph.complete(4), 3, 3)
print(f"\nK4 is (3,3)-robust: {report.robust}")
print(f"witness: S1={sorted(report.witness.s1)} S2={sorted(report.witness.s2)} "
      f"after {report.pairs_checked} pairs")
