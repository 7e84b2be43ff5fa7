import math

import numpy as np
import pytest

from repeatable_risk.errors import ConfigError, DimensionError, SimulationDivergedError
from repeatable_risk.subjects import (CategoricalSubject, PendulumParams, PendulumState,
                                      PendulumSubject, Trajectory, categorical_failure, control,
                                      failure, make_controller, make_lqr, make_pid,
                                      pendulum_step, subjects_from_config)

CONTROLLERS = ("pid", "lqr", "nmpc")


def energy(theta, omega, p):
    return 0.5 * p.mass * p.length**2 * omega**2 + p.mass * p.gravity * p.length * np.cos(theta)


def euler_oracle(theta, omega, torque, p, substeps=100):
    h = p.dt / substeps
    ml2 = p.mass * p.length**2
    for _ in range(substeps):
        acc = (p.gravity / p.length) * math.sin(theta) - (p.friction / ml2) * omega + torque / ml2
        theta, omega = theta + h * omega, omega + h * acc
    return theta, omega


# -- plant -------------------------------------------------------------------

def test_upright_equilibrium(params):
    s = pendulum_step(PendulumState(0.0, 0.0), params, 0.0)
    assert (s.theta, s.theta_dot, s.torque) == (0.0, 0.0, 0.0)
    assert s.time == pytest.approx(params.dt)


def test_hanging_equilibrium(params):
    s = PendulumState(math.pi, 0.0)
    for _ in range(100):
        s = pendulum_step(s, params, 0.0)
    assert s.theta == pytest.approx(math.pi, abs=1e-12)
    assert s.theta_dot == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("theta,omega,substeps", [(0.1, 0.0, 100), (0.3, -0.4, 10_000),
                                                  (-1.0, 2.0, 10_000)])
def test_rk4_step_against_fine_euler(params, theta, omega, substeps):
    # with a nonzero rate the Euler oracle itself needs finer substeps to reach 1e-6
    s = pendulum_step(PendulumState(theta, omega), params, 0.0)
    ref = euler_oracle(theta, omega, 0.0, params, substeps)
    assert s.theta == pytest.approx(ref[0], abs=1e-6)
    assert s.theta_dot == pytest.approx(ref[1], abs=1e-6)


def test_energy_non_increasing_without_torque(params):
    s = PendulumState(2.5, 1.5)
    e_prev = energy(s.theta, s.theta_dot, params)
    for _ in range(3000):
        s = pendulum_step(s, params, 0.0)
        e = energy(s.theta, s.theta_dot, params)
        assert e <= e_prev + 1e-8
        e_prev = e


def test_actuation_rate_limit_then_saturation(params):
    s = pendulum_step(PendulumState(0.0, 0.0, torque=0.0), params, 5.0)
    assert s.torque == pytest.approx(params.rate_limit * params.dt)
    s = pendulum_step(PendulumState(0.0, 0.0, torque=0.95), params, 5.0)
    assert s.torque == 1.0
    s = pendulum_step(PendulumState(0.0, 0.0, torque=-0.95), params, -5.0)
    assert s.torque == -1.0


def test_non_finite_state_rejected(params):
    with pytest.raises(SimulationDivergedError):
        pendulum_step(PendulumState(math.nan, 0.0), params, 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        PendulumParams(dt=0.02)
    with pytest.raises(ValueError):
        PendulumParams(horizon=4.0)
    with pytest.raises(ValueError):
        PendulumParams(mass=-1.0)


# -- controllers -------------------------------------------------------------

@pytest.mark.parametrize("kind", CONTROLLERS)
def test_zero_command_at_equilibrium(params, kind):
    assert control(make_controller(kind, params), PendulumState(0.0, 0.0), 0.0, params) == 0.0


@pytest.mark.parametrize("kind", CONTROLLERS)
def test_command_is_restoring(params, kind):
    assert control(make_controller(kind, params), PendulumState(0.01, 0.0), 0.0, params) < 0


def test_lqr_command_is_minus_k_theta(params):
    c = make_lqr(params)
    assert control(c, PendulumState(0.01, 0.0)) == pytest.approx(-c.gains[0] * 0.01)


def test_pid_law():
    c = make_pid(3.0, 2.0, 1.0)
    assert control(c, PendulumState(0.1, 0.2), integral=0.5) == pytest.approx(-(0.3 + 1.0 + 0.2))


def test_unknown_controller():
    with pytest.raises(ConfigError):
        make_controller("bang-bang")


# -- closed loop -------------------------------------------------------------

@pytest.mark.parametrize("kind", CONTROLLERS)
def test_zero_push_stays_upright(pendulums, params, kind):
    traj = pendulums[kind].simulate(0.0)
    assert len(traj) == params.steps + 1
    assert np.all(traj.theta == 0) and np.all(traj.torque == 0)
    assert failure(traj, params) == 0


@pytest.mark.parametrize("kind", CONTROLLERS)
@pytest.mark.parametrize("v", [0.9, -0.9])
def test_largest_push_fails(pendulums, params, kind, v):
    assert failure(pendulums[kind].simulate(v), params) == 1
    assert pendulums[kind].failures([v])[0] == 1


@pytest.mark.parametrize("kind", CONTROLLERS)
def test_simulation_deterministic(pendulums, kind):
    a, b = pendulums[kind].simulate(0.27), pendulums[kind].simulate(0.27)
    assert a.theta.tobytes() == b.theta.tobytes()
    assert a.torque.tobytes() == b.torque.tobytes()


@pytest.mark.parametrize("kind", CONTROLLERS)
def test_trajectory_time_and_actuation_invariants(pendulums, params, kind):
    for v in np.linspace(-0.9, 0.9, 37):
        traj = pendulums[kind].simulate(v)
        assert traj.theta[0] == 0.0 and traj.theta_dot[0] == pytest.approx(v / params.length)
        assert np.allclose(np.diff(traj.time), params.dt)
        assert np.all(np.abs(traj.torque) <= params.torque_limit)
        assert np.all(np.abs(np.diff(traj.torque)) <= params.rate_limit * params.dt + 1e-12)


@pytest.mark.parametrize("kind", CONTROLLERS)
def test_batch_matches_simulate(pendulums, params, kind):
    rng = np.random.default_rng(42)
    v = rng.uniform(-0.9, 0.9, 150 if kind == "nmpc" else 600)
    v = np.concatenate([v, np.linspace(0.28, 0.32, 41), -np.linspace(0.28, 0.32, 41)])
    subject = pendulums[kind]
    slow = np.array([failure(subject.simulate(x), params) for x in v])
    np.testing.assert_array_equal(subject.failures(v), slow)


def test_failure_sets_pairwise_distinct(pendulums, centers):
    sets = {k: pendulums[k].failures(centers) for k in CONTROLLERS}
    for a in CONTROLLERS:
        for b in CONTROLLERS:
            if a < b:
                assert not np.array_equal(sets[a], sets[b]), (a, b)


def _envelope(subject, tol=1e-3):
    lo, hi = 0.0, 0.9
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if subject.failures([mid])[0]:
            hi = mid
        else:
            lo = mid
    return lo, hi


@pytest.mark.parametrize("kind", CONTROLLERS)
def test_stabilization_envelope_inside_support(pendulums, params, kind):
    lo, hi = _envelope(pendulums[kind])
    assert 0.0 < lo < hi < 0.9
    assert failure(pendulums[kind].simulate(lo), params) == 0
    assert failure(pendulums[kind].simulate(hi), params) == 1
    # below the envelope every sampled push is recovered
    assert not pendulums[kind].failures(np.linspace(-lo, lo, 101) * 0.999).any()


def test_out_of_support_rejected(pendulums):
    with pytest.raises(DimensionError):
        pendulums["lqr"].simulate(0.95)
    with pytest.raises(DimensionError):
        pendulums["lqr"].failures([0.0, math.nan])


def test_subject_key_tracks_gains(params):
    a = PendulumSubject(make_pid(), params)
    b = PendulumSubject(make_pid(kp=15.0), params)
    assert a.key() == PendulumSubject(make_pid(), params).key()
    assert a.key() != b.key()


# -- failure check -----------------------------------------------------------

def test_failure_examples(params):
    z = np.zeros(5)
    assert failure(Trajectory(z, z, z, np.arange(5) * params.dt), params) == 0
    th = np.array([0.0, 0.5, math.pi / 2 + 0.1, 0.0])
    assert failure(Trajectory(th, np.zeros(4), np.zeros(4), np.arange(4) * params.dt), params) == 1
    om = np.array([0.0, 0.0, 0.0, 0.06])
    assert failure(Trajectory(np.zeros(4), om, np.zeros(4), np.arange(4) * params.dt), params) == 1


def test_trajectory_state_round_trip():
    states = [PendulumState(0.1 * k, -0.1 * k, 0.0, 0.01 * k) for k in range(4)]
    assert Trajectory.from_states(states).states == states


# -- categorical subject -----------------------------------------------------

def test_categorical_lookup():
    assert categorical_failure(CategoricalSubject([0, 0, 1]), 2) == 1
    assert categorical_failure(CategoricalSubject([1, 0]), 0) == 1
    zeros = CategoricalSubject([0, 0, 0, 0])
    assert all(categorical_failure(zeros, k) == 0 for k in range(4))


def test_categorical_out_of_range():
    s = CategoricalSubject([0, 1])
    for bad in (2, -1, 0.5):
        with pytest.raises(DimensionError):
            categorical_failure(s, bad)
    with pytest.raises(ValueError):
        CategoricalSubject([0, 2])


def test_subjects_from_config(tmp_path):
    path = tmp_path / "labels.json"
    path.write_text("[0, 1, 1]")
    (s,) = subjects_from_config({"kind": "categorical", "failure_labels_path": str(path)})
    assert list(s.labels) == [0, 1, 1]
    subs = subjects_from_config({"kind": "pendulum", "gains": {"pid": {"kp": 15.0}}},
                                ["pid", "lqr"])
    assert [x.name for x in subs] == ["pid", "lqr"]
    assert subs[0].controller.gains[0] == 15.0
    with pytest.raises(ConfigError):
        subjects_from_config({"kind": "rabbit"})
