"""Black-box testing subjects: the pendulum push-over bench and synthetic subjects.

A subject maps a batch of sample points to failure indicators through
``subject.failures(xs)``; estimators and the enumeration oracle only use that
method, so any deterministic black box with that shape can be tested.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import solve_continuous_are

from . import _kernels as K
from .errors import ConfigError, DimensionError, SimulationDivergedError


@dataclass(frozen=True)
class PendulumParams:
    length: float = 1.0
    mass: float = 1.0
    friction: float = 0.5
    gravity: float = 9.817
    dt: float = 0.01
    horizon: float = 10.0
    fail_angle: float = math.pi / 2
    rate_limit: float = 10.0
    torque_limit: float = 1.0
    recover_theta: float = 0.05
    recover_omega: float = 0.05

    def __post_init__(self):
        vals = asdict(self)
        if any(not v > 0 for v in vals.values()):
            raise ValueError("pendulum parameters must all be positive")
        if self.dt > 0.01:
            raise ValueError("dt must be <= 0.01 s")
        if self.horizon < 5.0:
            raise ValueError("horizon must be >= 5 s")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def as_array(self) -> np.ndarray:
        return np.array([self.gravity, self.length, self.mass, self.friction, self.dt,
                         self.steps, self.fail_angle, self.rate_limit, self.torque_limit,
                         self.recover_theta, self.recover_omega], dtype=float)

    def linearization(self):
        """Continuous (A, B) about the upright equilibrium."""
        ml2 = self.mass * self.length**2
        A = np.array([[0.0, 1.0], [self.gravity / self.length, -self.friction / ml2]])
        B = np.array([[0.0], [1.0 / ml2]])
        return A, B


@dataclass(frozen=True)
class PendulumState:
    theta: float
    theta_dot: float
    torque: float = 0.0
    time: float = 0.0


@dataclass(frozen=True)
class Controller:
    kind: str  # "pid" | "lqr" | "nmpc"
    gains: tuple[float, ...]
    settings: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def code(self) -> int:
        return {"pid": K.PID, "lqr": K.LQR, "nmpc": K.NMPC}[self.kind]

    def gain_array(self) -> np.ndarray:
        return np.asarray(self.gains, dtype=float)


def lqr_gain(params: PendulumParams, q=(10.0, 1.0), r=1.0):
    """State-feedback gain and Riccati matrix for the upright linearization."""
    A, B = params.linearization()
    P = solve_continuous_are(A, B, np.diag(q), np.array([[r]]))
    return (B.T @ P / r).ravel(), P


def make_pid(kp=14.0, ki=1.0, kd=2.0) -> Controller:
    return Controller("pid", (kp, ki, kd), {"kp": kp, "ki": ki, "kd": kd})


def make_lqr(params: PendulumParams = PendulumParams(), q=(10.0, 1.0), r=1.0) -> Controller:
    k, _ = lqr_gain(params, q, r)
    return Controller("lqr", (float(k[0]), float(k[1])), {"q": list(q), "r": r})


def make_nmpc(params: PendulumParams = PendulumParams(), horizon=40, pred_dt=0.02,
              iterations=3, step_size=0.5, q=(10.0, 1.0), r=1.0, delayed=True) -> Controller:
    """Receding-horizon controller; re-plans every ``pred_dt`` seconds.

    With ``delayed`` the plan solved at one re-plan instant is applied at the
    next one, modelling a solver that needs a full period to finish.
    """
    period = int(round(pred_dt / params.dt))
    if period < 1 or abs(period * params.dt - pred_dt) > 1e-12:
        raise ValueError("pred_dt must be a positive multiple of the simulation dt")
    _, P = lqr_gain(params, q, r)
    gains = (horizon, pred_dt, period, iterations, step_size, q[0], q[1], r,
             P[0, 0], P[0, 1], P[1, 1], 1.0 if delayed else 0.0)
    settings = {"horizon": horizon, "pred_dt": pred_dt, "iterations": iterations,
                "step_size": step_size, "q": list(q), "r": r, "delayed": delayed}
    return Controller("nmpc", tuple(float(g) for g in gains), settings)


def make_controller(kind: str, params: PendulumParams = PendulumParams(), **gains) -> Controller:
    kind = kind.lower()
    if kind == "pid":
        return make_pid(**gains)
    if kind == "lqr":
        return make_lqr(params, **gains)
    if kind == "nmpc":
        return make_nmpc(params, **gains)
    raise ConfigError(f"unknown controller kind {kind!r}")


def pendulum_step(state: PendulumState, params: PendulumParams, torque_cmd: float) -> PendulumState:
    """One actuation (rate limit, saturation) plus one RK4 step."""
    if not all(math.isfinite(v) for v in (state.theta, state.theta_dot, state.torque)):
        raise SimulationDivergedError("non-finite pendulum state")
    plant = params.as_array()
    torque = K.actuate(state.torque, float(torque_cmd), plant)
    th, om = K.rk4(state.theta, state.theta_dot, torque, plant)
    if not (math.isfinite(th) and math.isfinite(om)):
        raise SimulationDivergedError("pendulum integration diverged")
    return PendulumState(th, om, torque, state.time + params.dt)


def control(controller: Controller, state: PendulumState, integral: float = 0.0,
            params: PendulumParams = PendulumParams()) -> float:
    """Torque command of ``controller`` at ``state`` (NMPC solved from a cold start)."""
    g = controller.gain_array()
    if controller.kind == "pid":
        return -(g[0] * state.theta + g[1] * integral + g[2] * state.theta_dot)
    if controller.kind == "lqr":
        return -(g[0] * state.theta + g[1] * state.theta_dot)
    useq = np.zeros(int(g[0]))
    plant = params.as_array()
    K._nmpc_seed(state.theta, state.theta_dot, useq, 0, g, plant)
    if not K._nmpc_solve(state.theta, state.theta_dot, useq, g, plant):
        raise SimulationDivergedError("NMPC iterate became non-finite")
    return float(useq[0])


@dataclass(frozen=True)
class Trajectory:
    theta: np.ndarray
    theta_dot: np.ndarray
    torque: np.ndarray
    time: np.ndarray

    def __len__(self):
        return len(self.theta)

    @property
    def states(self) -> list[PendulumState]:
        return [PendulumState(*map(float, s)) for s in
                zip(self.theta, self.theta_dot, self.torque, self.time)]

    @classmethod
    def from_states(cls, states) -> "Trajectory":
        arr = np.array([[s.theta, s.theta_dot, s.torque, s.time] for s in states], dtype=float)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])


def failure(trajectory: Trajectory, params: PendulumParams) -> int:
    """1 if the trajectory leaves |theta| <= fail_angle or ends outside the recovery ball."""
    if len(trajectory) == 0:
        raise ValueError("empty trajectory")
    if np.any(np.abs(trajectory.theta) > params.fail_angle):
        return 1
    if not np.all(np.isfinite(trajectory.theta)) or not np.all(np.isfinite(trajectory.theta_dot)):
        return 1
    end_ok = (abs(trajectory.theta[-1]) <= params.recover_theta
              and abs(trajectory.theta_dot[-1]) <= params.recover_omega)
    return 0 if end_ok else 1


class PendulumSubject:
    """Push-over test of a torque-limited inverted pendulum under one controller.

    The sample point is the initial tip speed v_d (m/s); the pendulum starts
    upright with angular rate v_d / length.
    """

    def __init__(self, controller: Controller, params: PendulumParams = PendulumParams(),
                 support=(-0.9, 0.9)):
        self.controller = controller
        self.params = params
        self.support = tuple(float(s) for s in support)
        self._plant = params.as_array()
        self._gains = controller.gain_array()

    @property
    def name(self) -> str:
        return self.controller.kind

    def key(self) -> str:
        """Stable hash of everything that determines the failure map."""
        blob = json.dumps({"params": asdict(self.params), "kind": self.controller.kind,
                           "gains": list(self.controller.gains), "support": self.support},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def _check(self, v: np.ndarray):
        lo, hi = self.support
        if np.any(~np.isfinite(v)) or np.any((v < lo) | (v > hi)):
            raise DimensionError(f"sample outside pendulum support [{lo}, {hi}]")

    def simulate(self, v_d: float) -> Trajectory:
        v = float(v_d)
        self._check(np.array([v]))
        n = self.params.steps + 1
        th, om, tq = np.empty(n), np.empty(n), np.empty(n)
        _, count, status = K.run_closed_loop(v, self.controller.code, self._gains, self._plant,
                                             True, th, om, tq)
        if status == 1:
            raise SimulationDivergedError(f"simulation diverged at v_d={v}")
        time = np.arange(count) * self.params.dt
        return Trajectory(th[:count].copy(), om[:count].copy(), tq[:count].copy(), time)

    def failures(self, xs) -> np.ndarray:
        v = np.ascontiguousarray(np.asarray(xs, dtype=float).ravel())
        self._check(v)
        return K.batch_failures(v, self.controller.code, self._gains, self._plant)


class CategoricalSubject:
    """Lookup-table subject over categorical outcomes; exact oracles are available."""

    def __init__(self, failure_labels, name: str = "categorical"):
        labels = np.asarray(failure_labels)
        if labels.ndim != 1 or not np.all(np.isin(labels, (0, 1))):
            raise ValueError("failure_labels must be a vector of 0/1")
        self.labels = labels.astype(np.uint8)
        self.name = name

    def key(self) -> str:
        return hashlib.sha256(self.labels.tobytes()).hexdigest()[:16]

    def failures(self, xs) -> np.ndarray:
        x = np.asarray(xs, dtype=float).ravel()
        k = np.rint(x)
        if np.any(k != x) or np.any((k < 0) | (k >= self.labels.size)):
            raise DimensionError("categorical sample index out of range")
        return self.labels[k.astype(np.int64)]


def categorical_failure(subject: CategoricalSubject, x) -> int:
    return int(subject.failures([x])[0])


class FunctionSubject:
    """Wrap a vectorized indicator ``fn(xs) -> {0,1}`` as a subject."""

    def __init__(self, fn, name: str = "function", support=None):
        self.fn = fn
        self.name = name
        self.support = support

    def key(self) -> str:
        return self.name

    def failures(self, xs) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(xs, dtype=float)), dtype=np.uint8)


def subjects_from_config(cfg: dict, controllers=None) -> list:
    """Build one subject per controller (pendulum) or a single categorical subject."""
    kind = cfg.get("kind")
    if kind == "pendulum":
        params = PendulumParams(**cfg.get("params", {}))
        names = controllers or cfg.get("controllers") or ["pid", "lqr", "nmpc"]
        gains = cfg.get("gains", {})
        return [PendulumSubject(make_controller(n, params, **gains.get(n, {})), params)
                for n in names]
    if kind == "categorical":
        if "failure_labels" in cfg:
            labels = cfg["failure_labels"]
        elif "failure_labels_path" in cfg:
            with open(cfg["failure_labels_path"]) as fh:
                labels = json.load(fh)
        else:
            raise ConfigError("categorical subject needs failure_labels or failure_labels_path")
        return [CategoricalSubject(labels, cfg.get("name", "categorical"))]
    raise ConfigError(f"unknown subject kind {kind!r}")
