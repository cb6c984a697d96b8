"""Agree on a scalar parameter while one agent lies.

A single agent keeps broadcasting 20 while everybody else starts between 0
and 10. Plain averaging is dragged all the way to 20. The filtered update
drops the most extreme neighbor values and stays inside the honest range.
"""
import numpy as np

from resilient_voronoi import consensus as cs
from resilient_voronoi.scenarios import run_parameter_estimation
from resilient_voronoi.study import Circle, generate_formation

points = generate_formation(Circle(20, scale=5.0))
values = np.random.default_rng(0).uniform(0, 10, 20)
liar = {5: cs.ConstantAdversary(20.0)}
cfg = cs.WmsrConfig(max_steps=5_000)

honest = run_parameter_estimation(points, values, None, cfg=cfg)
print(f"no adversary:      {honest.verdict.value[0]:.4f} after {honest.verdict.step} steps")
for F in (0, 1):
    res = run_parameter_estimation(points, values, liar, F=F, cfg=cfg)
    coop = np.delete(res.trajectory[-1].values[:, 0], 5)
    print(f"adversary, F={F}:   {coop.mean():.4f} ({res.verdict.status}), "
          f"always in [{res.safe.lo[0]:.2f}, {res.safe.hi[0]:.2f}]: {all(res.inside)}")
