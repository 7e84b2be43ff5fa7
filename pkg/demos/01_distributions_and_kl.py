"""
Nominal and importance laws for the push-over bench
====================================================

The pendulum is pushed with a random tip speed v_d. Its real-world law p is a
truncated normal; the two importance laws lean toward large pushes. This
script prints densities, KL divergences and the log-ratio tail that the
budget planner consumes.
"""

import numpy as np

from repeatable_risk.distributions import PRESETS, density, draw, kl_divergence, tail_prob_log_ratio
from repeatable_risk.rng import make_stream

p = PRESETS["pendulum_nominal"]()
q1 = PRESETS["pendulum_q1"]()
q2 = PRESETS["pendulum_q2"]()

# Densities on a coarse grid. The importance laws put more weight on |v_d| > 0.3.
grid = np.linspace(-0.9, 0.9, 7)
print("v_d      p        q1       q2")
for v, a, b, c in zip(grid, density(p, grid), density(q1, grid), density(q2, grid)):
    print(f"{v:+.2f}  {a:.4f}  {b:.4f}  {c:.4f}")

# KL divergence drives the exp(D + c) budget; q2 is much further from p.
for name, q in (("q1", q1), ("q2", q2)):
    print(f"D(p || {name}) = {kl_divergence(p, q):.6f}")

# Tail mass of the log-likelihood ratio under p, for a few thresholds.
for t in (0.0, 0.2, 0.5):
    print(f"P_p(log p/q1 > {t}) = {tail_prob_log_ratio(p, q1, t):.4f}")

# Draws are a pure function of the seed.
a = draw(p, make_stream(123), 5)
b = draw(p, make_stream(123), 5)
print("same seed, same draws:", np.array_equal(a, b), a.round(4))
