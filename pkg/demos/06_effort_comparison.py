"""
Effort of the two planners across tolerances
============================================

Sweeps tau and r_bar for three importance laws and writes the planned
budgets of both planners to demo_out/compare.csv (log10 columns included
for plotting).
"""

import os

from repeatable_risk.distributions import PRESETS
from repeatable_risk.harness import compare_variants, write_compare_csv

p = PRESETS["pendulum_nominal"]()
qs = {"p=q": p, "q1": PRESETS["pendulum_q1"](), "q2": PRESETS["pendulum_q2"]()}
rows = compare_variants(p, qs, taus=(0.05, 0.1, 0.2), r_bars=(0.1, 0.3, 0.5))

print(f"{'q':4s} {'tau':>5s} {'r_bar':>5s} {'alg3 n':>10s} {'direct n':>9s}")
for r in rows:
    print(f"{r['q']:4s} {r['tau']:5.2f} {r['r_bar']:5.2f} {str(r['alg3_n']):>10s} {r['direct_n']:9d}")

os.makedirs("demo_out", exist_ok=True)
write_compare_csv(rows, "demo_out/compare.csv")
