"""
Monte Carlo, importance sampling and the relative half-width rule
=================================================================

Both estimators are unbiased. A runtime stopping rule on the relative
half-width makes the sample count and the final value depend on the seed,
so two runs of the same test rarely agree.
"""

import numpy as np

from repeatable_risk.distributions import PRESETS
from repeatable_risk.estimators import TerminationRule, run_importance_sampling, run_monte_carlo
from repeatable_risk.rng import trial_stream
from repeatable_risk.subjects import PendulumParams, PendulumSubject, make_lqr

params = PendulumParams()
lqr = PendulumSubject(make_lqr(params), params)
p, q1 = PRESETS["pendulum_nominal"](), PRESETS["pendulum_q1"]()

fixed = TerminationRule.fixed(20_000)
mc = run_monte_carlo(lqr, p, fixed, trial_stream(0, 0))
is_ = run_importance_sampling(lqr, p, q1, fixed, trial_stream(0, 0))
print(f"MC  estimate {mc.value:.4f}  (failures {mc.failure_count}/{mc.sample_count})")
print(f"IS  estimate {is_.value:.4f}  (failures {is_.failure_count}/{is_.sample_count})")

# RHW-terminated runs: a loose s_r keeps the demo quick, the effect is the same.
rule = TerminationRule.rhw(s_r=0.01)
runs = [run_importance_sampling(lqr, p, q1, rule, trial_stream(0, t)) for t in range(10)]
values = np.array([r.value for r in runs])
counts = np.array([r.sample_count for r in runs])
print("RHW values:", values.round(5))
print("RHW sample counts:", counts)
print(f"distinct values: {len(set(values))}, cv of counts: {counts.std(ddof=1) / counts.mean():.3f}")
