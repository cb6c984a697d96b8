"""Meet on a polygon around an agreed center.

Agents move toward their corner of a regular polygon around their current
center estimate while running consensus on that estimate. A drifting
adversary walks its claimed center away; the filtered update ignores it.
"""
import numpy as np

from resilient_voronoi import consensus as cs
from resilient_voronoi.scenarios import RendezvousConfig, drifting_adversary, run_rendezvous

rng = np.random.default_rng(1)
positions, centers = rng.uniform(0, 10, (12, 2)), rng.uniform(0, 10, (12, 2))
safe = cs.safe_interval(cs.initial_state(centers))
adv = {0: drifting_adversary(np.random.default_rng(2), safe, 0.2)}

cases = [("all cooperative, K=2 F=1", None, dict(K=2, F=1)),
         ("drifting liar, F=0", adv, dict(K=1, F=0)),
         ("drifting liar, F=1", adv, dict(K=1, F=1)),
         ("all cooperative, K=1 F=2", None, dict(K=1, F=2))]
for label, adversaries, kw in cases:
    res = run_rendezvous(positions, centers, adversaries,
                         RendezvousConfig(radius=3, max_steps=1000, **kw))
    center = res.centers[-1][res.cooperative].mean(axis=0)
    print(f"{label:26s} {res.verdict.status:9s} step {res.verdict.step:4d} "
          f"center ({center[0]:7.2f}, {center[1]:7.2f}) safe: {all(res.centers_inside())}"
          + (f" stalled agents {list(res.verdict.agents)}" if res.verdict.agents else ""))
