"""Share an occupancy map while one agent lies about a corridor.

Eight agents start in the lower room of a hallway map. A ninth agent claims
the only corridor to the upper hallway is blocked. With plain averaging the
team believes it and never goes upstairs; with F=1 the claim is filtered out
and the whole map is explored.
"""
from resilient_voronoi.scenarios import hallway_scenario, run_map_consensus


def render(belief):
    return "\n".join("".join("?" if v != v else "#" if v >= 0.5 else "." for v in row)
                     for row in belief)


h = hallway_scenario()
for F in (0, 1):
    res = run_map_consensus(h.environment, h.starts, h.adversaries, F=F)
    print(f"F={F}: coverage {res.coverage:.0%}, explored at step {res.explored_step}, "
          f"beliefs match truth: {res.beliefs_match_truth()}")
    print(render(res.beliefs[-1][0]), end="\n\n")
