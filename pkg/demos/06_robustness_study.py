"""How often random formations reach each robustness level.

For random rectangles of 8 to 12 agents, the base graph is always at least
(2,2)-robust and the 2-hop graph at least (3,3)-robust. Higher levels depend
on the formation.
"""
from resilient_voronoi.study import TwoLines, random_specs, run_robustness_study

report = run_robustness_study(random_specs(100, 0), 4)
for row in report.table():
    print(",".join(str(x) for x in row))
print(f"minimum max r=s per K: {[report.minimum(K) for K in report.ks]}")

two_lines = run_robustness_study([TwoLines(11)], 8)
print("\ntwo lines, N=11")
for s in two_lines.samples:
    print(f"K={s.K}: {s.edges} edges, max r=s {s.max_rs}{' (complete)' if s.complete else ''}")
