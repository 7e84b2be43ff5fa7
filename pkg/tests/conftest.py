import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from repeatable_risk.distributions import PRESETS
from repeatable_risk.subjects import PendulumParams, PendulumSubject, make_controller

settings.register_profile("repo", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

CONTROLLERS = ("pid", "lqr", "nmpc")


@pytest.fixture(scope="session")
def params():
    return PendulumParams()


@pytest.fixture(scope="session")
def pendulums(params):
    return {k: PendulumSubject(make_controller(k, params), params) for k in CONTROLLERS}


@pytest.fixture(scope="session")
def nominal():
    return PRESETS["pendulum_nominal"]()


@pytest.fixture(scope="session")
def q1():
    return PRESETS["pendulum_q1"]()


@pytest.fixture(scope="session")
def centers():
    """Cell centers of the 0.002 enumeration grid over [-0.9, 0.9]."""
    return -0.9 + (np.arange(900) + 0.5) * 0.002


@pytest.fixture(scope="session")
def criterion_log(request):
    """Collects one PASS/FAIL line per acceptance criterion."""
    lines = []
    request.config._criterion_lines = lines

    def log(label, ok, detail):
        line = f"{label}: {'PASS' if ok else 'FAIL'} ({detail})"
        lines.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
