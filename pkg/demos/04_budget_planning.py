"""
Planning a fixed budget and a rounding grid
===========================================

The distribution-dependent planner scans c until the accuracy bound holds
and then fixes n = ceil(exp(D + c)) before any test is run. The
distribution-free planner needs no (p, q) at all. Both come with a
randomized grid that turns accurate estimates into identical outputs.
"""

import math

from repeatable_risk.distributions import PRESETS
from repeatable_risk.planner import (PlannerParams, direct_sample_size, make_grid, plan_budget,
                                     repeatability_failure_prob)
from repeatable_risk.rounding import round_estimate

p = PRESETS["pendulum_nominal"]()
params = PlannerParams(beta=0.4, tau=0.1, r_bar=0.3)

for name in ("pendulum_nominal", "pendulum_q1", "pendulum_q2"):
    plan = plan_budget(p, PRESETS[name](), params)
    print(f"q={name:17s} D={plan.kl:.4f} c={plan.c:.2f} n={plan.n}")

# With q = p the tail term vanishes and c has a closed form.
print(f"closed form c* = 4 ln(r_bar (beta+1) / (beta tau)) = {4 * math.log(10.5):.4f}")
print(f"distribution-free n = {direct_sample_size(params)}")

grid = make_grid(params, "alg3", grid_seed=0)
print(f"grid: alpha={grid.alpha:.6f}, alpha0={grid.alpha0:.6f}")
for raw in (0.49, 0.5078, 0.52, 0.60):
    print(f"raw {raw:.4f} -> output {round_estimate(raw, grid).value:.6f}")

n = plan_budget(p, PRESETS["pendulum_q1"](), params).n
print(f"Hoeffding failure bound at n={n}: {repeatability_failure_prob(n, params.tau):.3e}")
