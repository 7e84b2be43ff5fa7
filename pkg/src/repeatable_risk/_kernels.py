"""Compiled closed-loop pendulum kernels.

Layout of the flat parameter vectors (kept as arrays so numba sees one
signature):

    plant:  [gravity, length, mass, friction, dt, steps, fail_angle,
             rate_limit, torque_limit, ball_theta, ball_omega]
    gains:  PID  -> [kp, ki, kd]
            LQR  -> [k_theta, k_omega]
            NMPC -> [horizon, pred_dt, period_steps, iterations, step_size,
                     q_theta, q_omega, r, p11, p12, p22, delayed]
"""

import math

import numpy as np
from numba import config as _nb_config
from numba import njit, prange

# skip the TBB layer: the installed TBB is older than numba wants and warns
_nb_config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

PID, LQR, NMPC = 0, 1, 2

# plant vector indices
G, L, M, B, DT, STEPS, FAIL, RATE, TMAX, BALL_TH, BALL_OM = range(11)


@njit(cache=True)
def accel(theta, omega, torque, plant):
    ml2 = plant[M] * plant[L] * plant[L]
    return (plant[G] / plant[L]) * math.sin(theta) - (plant[B] / ml2) * omega + torque / ml2


@njit(cache=True)
def rk4(theta, omega, torque, plant):
    h = plant[DT]
    k1t = omega
    k1w = accel(theta, omega, torque, plant)
    k2t = omega + 0.5 * h * k1w
    k2w = accel(theta + 0.5 * h * k1t, k2t, torque, plant)
    k3t = omega + 0.5 * h * k2w
    k3w = accel(theta + 0.5 * h * k2t, k3t, torque, plant)
    k4t = omega + h * k3w
    k4w = accel(theta + h * k3t, k4t, torque, plant)
    theta_n = theta + (h / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    omega_n = omega + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    return theta_n, omega_n


@njit(cache=True)
def actuate(prev_torque, cmd, plant):
    """Rate limit, then saturate."""
    step = plant[RATE] * plant[DT]
    t = min(max(cmd, prev_torque - step), prev_torque + step)
    return min(max(t, -plant[TMAX]), plant[TMAX])


@njit(cache=True)
def _nmpc_seed(theta, omega, useq, start, gains, plant):
    """Fill useq[start:] by rolling the clipped LQR law through the prediction model."""
    n = int(gains[0])
    h = gains[1]
    a = plant[G] / plant[L]
    ml2 = plant[M] * plant[L] * plant[L]
    c = plant[B] / ml2
    d = 1.0 / ml2
    kt = gains[9] * d / gains[7]
    kw = gains[10] * d / gains[7]
    umax = plant[TMAX]
    xt, xw = theta, omega
    for k in range(n):
        if k >= start:
            useq[k] = min(max(-(kt * xt + kw * xw), -umax), umax)
        xt, xw = xt + h * xw, xw + h * (a * math.sin(xt) - c * xw + d * useq[k])


@njit(cache=True)
def _nmpc_solve(theta, omega, useq, gains, plant):
    """Projected-gradient pass over the open-loop torque sequence, in place.

    Euler prediction model, quadratic stage cost, LQR terminal cost, box
    constraint on torque. Returns False on a non-finite iterate.
    """
    n = int(gains[0])
    h = gains[1]
    iters = int(gains[3])
    eta = gains[4]
    qt, qw, r = gains[5], gains[6], gains[7]
    p11, p12, p22 = gains[8], gains[9], gains[10]
    a = plant[G] / plant[L]
    ml2 = plant[M] * plant[L] * plant[L]
    c = plant[B] / ml2
    d = 1.0 / ml2
    umax = plant[TMAX]
    xt = np.empty(n + 1)
    xw = np.empty(n + 1)
    for _ in range(iters):
        xt[0] = theta
        xw[0] = omega
        for k in range(n):
            xt[k + 1] = xt[k] + h * xw[k]
            xw[k + 1] = xw[k] + h * (a * math.sin(xt[k]) - c * xw[k] + d * useq[k])
        lt = 2.0 * (p11 * xt[n] + p12 * xw[n])
        lw = 2.0 * (p12 * xt[n] + p22 * xw[n])
        for k in range(n - 1, -1, -1):
            g = 2.0 * r * useq[k] * h + h * d * lw
            # adjoint through the Euler map
            nlt = 2.0 * qt * xt[k] * h + lt + h * a * math.cos(xt[k]) * lw
            nlw = 2.0 * qw * xw[k] * h + h * lt + (1.0 - h * c) * lw
            lt, lw = nlt, nlw
            u = useq[k] - eta * g
            useq[k] = min(max(u, -umax), umax)
            if not math.isfinite(useq[k]):
                return False
    return True


@njit(cache=True)
def doomed_angle(plant):
    """Angle beyond which gravity beats the torque limit (10% margin).

    If |theta| exceeds it with theta_dot of the same sign, theta_dot can never
    reach zero under any admissible torque, so the pendulum reaches
    fail_angle. Returns inf when the certificate does not apply.
    """
    s = 1.1 * plant[TMAX] / (plant[M] * plant[G] * plant[L])
    if s >= 1.0 or plant[FAIL] > 0.5 * math.pi:
        return math.inf
    return math.asin(s)


SETTLED = 1e-6


@njit(cache=True)
def run_closed_loop(v0, kind, gains, plant, record, out_theta, out_omega, out_torque):
    """Simulate one push-over test from initial tip speed ``v0``.

    Returns (failed, n_states, status) where status is 0 ok, 1 diverged,
    2 controller error. When ``record`` is set, states are written to the
    output arrays (length steps + 1). Without ``record`` the loop also stops
    once every state (plant and controller memory) is below SETTLED, which
    cannot end outside the recovery ball.
    """
    steps = int(plant[STEPS])
    dt = plant[DT]
    theta = 0.0
    omega = v0 / plant[L]
    torque = 0.0
    integ = 0.0
    held = 0.0
    pending = 0.0
    delayed = kind == NMPC and gains[11] != 0.0
    doomed = doomed_angle(plant)
    useq = np.zeros(int(gains[0]) if kind == NMPC else 1)
    period = int(gains[2]) if kind == NMPC else 1
    if record:
        out_theta[0] = theta
        out_omega[0] = omega
        out_torque[0] = torque
    for i in range(steps):
        if kind == PID:
            cmd = -(gains[0] * theta + gains[1] * integ + gains[2] * omega)
            integ += theta * dt
        elif kind == LQR:
            cmd = -(gains[0] * theta + gains[1] * omega)
        else:
            if i % period == 0:
                if delayed:
                    # the plan solved one period ago reaches the actuator now
                    held = pending
                if i == 0:
                    _nmpc_seed(theta, omega, useq, 0, gains, plant)
                else:
                    # warm start: shift the previous plan by one prediction step
                    for k in range(useq.size - 1):
                        useq[k] = useq[k + 1]
                    _nmpc_seed(theta, omega, useq, useq.size - 1, gains, plant)
                if not _nmpc_solve(theta, omega, useq, gains, plant):
                    return True, i + 1, 2
                if delayed:
                    pending = useq[0]
                else:
                    held = useq[0]
            cmd = held
        torque = actuate(torque, cmd, plant)
        theta, omega = rk4(theta, omega, torque, plant)
        if record:
            out_theta[i + 1] = theta
            out_omega[i + 1] = omega
            out_torque[i + 1] = torque
        if not (math.isfinite(theta) and math.isfinite(omega)):
            return True, i + 2, 1
        if abs(theta) > plant[FAIL]:
            return True, i + 2, 0
        if abs(theta) > doomed and theta * omega >= 0.0:
            return True, i + 2, 0
        if not record and abs(theta) < SETTLED and abs(omega) < SETTLED and abs(torque) < SETTLED:
            if kind == PID:
                settled = abs(gains[1] * integ) < SETTLED
            elif kind == NMPC:
                settled = abs(held) < SETTLED and abs(pending) < SETTLED
                for k in range(useq.size):
                    settled = settled and abs(useq[k]) < SETTLED
            else:
                settled = True
            if settled:
                return False, i + 2, 0
    recovered = abs(theta) <= plant[BALL_TH] and abs(omega) <= plant[BALL_OM]
    return not recovered, steps + 1, 0


@njit(cache=True, parallel=True)
def batch_failures(v, kind, gains, plant):
    out = np.empty(v.size, dtype=np.uint8)
    dummy = np.empty(1)
    for j in prange(v.size):
        failed, _, _ = run_closed_loop(v[j], kind, gains, plant, False, dummy, dummy, dummy)
        out[j] = 1 if failed else 0
    return out
