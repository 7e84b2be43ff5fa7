"""
Push-over tests of three controllers
====================================

A torque-limited inverted pendulum starts upright with angular rate v_d / l.
PID, LQR and NMPC each try to bring it back. A test fails when the rod tips
past 90 degrees or has not settled into a small ball after ten seconds.
"""

import numpy as np

from repeatable_risk.distributions import PRESETS
from repeatable_risk.oracle import enumerate_risk
from repeatable_risk.subjects import PendulumParams, PendulumSubject, failure, make_controller

params = PendulumParams()
subjects = {k: PendulumSubject(make_controller(k, params), params) for k in ("pid", "lqr", "nmpc")}

# One recorded trajectory per controller for a moderate push.
for name, s in subjects.items():
    traj = s.simulate(0.25)
    print(f"{name:5s} v_d=0.25: peak |theta|={np.abs(traj.theta).max():.3f} rad, "
          f"peak |torque|={np.abs(traj.torque).max():.2f} N m, failed={failure(traj, params)}")


# Largest recoverable push, by bisection on the failure indicator.
def envelope(subject, tol=1e-3):
    lo, hi = 0.0, 0.9
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if subject.failures([mid])[0] else (mid, hi)
    return lo


for name, s in subjects.items():
    print(f"{name:5s} recovers pushes up to about {envelope(s):.3f} m/s")

# Ground-truth risk under p by enumeration at 0.002 m/s.
p = PRESETS["pendulum_nominal"]()
for name, s in subjects.items():
    t = enumerate_risk(s, p, 0.002)
    print(f"{name:5s} r* = {t.r_star:.5f} over {t.points_evaluated} cells")
