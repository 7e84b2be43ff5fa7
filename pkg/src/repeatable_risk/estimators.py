"""Sampling loops for risk estimation: plain Monte Carlo and importance sampling.

Both loops draw in fixed-size chunks, run the subject on the chunk, then
replay the chunk sample by sample through a running accumulator so the
termination rule is checked after every single test, exactly as a sequential
loop would.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .distributions import Distribution

CHUNK = 2**16
Z95 = 1.959964

# accumulator slots
_N, _FAIL, _SUM, _MEAN, _M2, _SUMSQ = range(6)


@dataclass(frozen=True)
class TerminationRule:
    kind: str  # "fixed_n" or "rhw"
    fixed_n: int = 0
    s_r: float = 0.001
    confidence_z: float = Z95
    n_min: int = 100
    n_max: int = 10**7
    min_failures: int = 1

    def __post_init__(self):
        if self.kind == "fixed_n":
            if self.fixed_n < 1:
                raise ValueError("fixed_n must be >= 1")
        elif self.kind == "rhw":
            if not 0 < self.s_r < 1:
                raise ValueError("s_r must be in (0, 1)")
            if self.n_min < 2 or self.n_max < self.n_min:
                raise ValueError("need 2 <= n_min <= n_max")
        else:
            raise ValueError(f"unknown termination rule {self.kind!r}")

    @classmethod
    def fixed(cls, n: int) -> "TerminationRule":
        return cls("fixed_n", fixed_n=int(n))

    @classmethod
    def rhw(cls, s_r: float, confidence_z: float = Z95, n_min: int = 100,
            n_max: int = 10**7, min_failures: int = 1) -> "TerminationRule":
        return cls("rhw", s_r=s_r, confidence_z=confidence_z, n_min=n_min,
                   n_max=n_max, min_failures=min_failures)

    @property
    def cap(self) -> int:
        return self.fixed_n if self.kind == "fixed_n" else self.n_max


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    sample_count: int
    failure_count: int
    weighted_sum: float
    mean_weight_sq: float
    m2: float
    terminated: bool = True

    @property
    def sample_std(self) -> float:
        if self.sample_count < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.sample_count - 1))

    @property
    def relative_half_width(self) -> float:
        if self.value <= 0:
            return math.inf
        return Z95 * self.sample_std / (math.sqrt(self.sample_count) * self.value)


@njit(cache=True)
def _rhw_stop(n, failures, value, m2, z, s_r, n_min, min_failures):
    if n < n_min or failures < min_failures or value <= 0.0:
        return False
    std = math.sqrt(m2 / (n - 1))
    return z * std / (math.sqrt(n) * value) <= s_r


@njit(cache=True)
def _scan(contrib, indicator, acc, rhw, cap, z, s_r, n_min, min_failures):
    """Feed samples into ``acc`` one at a time; return (consumed, stop)."""
    for i in range(contrib.size):
        y = contrib[i]
        acc[_N] += 1.0
        acc[_FAIL] += indicator[i]
        acc[_SUM] += y
        acc[_SUMSQ] += y * y
        delta = y - acc[_MEAN]
        acc[_MEAN] += delta / acc[_N]
        acc[_M2] += delta * (y - acc[_MEAN])
        n = int(acc[_N])
        if n >= cap:
            return i + 1, True
        if rhw and _rhw_stop(n, int(acc[_FAIL]), acc[_SUM] / n, acc[_M2], z, s_r,
                             n_min, min_failures):
            return i + 1, True
    return contrib.size, False


def check_rhw(est: RiskEstimate, rule: TerminationRule) -> str:
    """'stop' once the relative half-width is at or below s_r (or n_max is hit)."""
    if rule.kind != "rhw":
        raise ValueError("check_rhw needs an rhw rule")
    if est.sample_count >= rule.n_max:
        return "stop"
    ok = _rhw_stop(est.sample_count, est.failure_count, est.value, est.m2,
                   rule.confidence_z, rule.s_r, rule.n_min, rule.min_failures)
    return "stop" if ok else "continue"


def _estimate(acc, terminated) -> RiskEstimate:
    n = int(acc[_N])
    return RiskEstimate(value=acc[_SUM] / n, sample_count=n, failure_count=int(acc[_FAIL]),
                        weighted_sum=float(acc[_SUM]), mean_weight_sq=float(acc[_SUMSQ] / n),
                        m2=float(acc[_M2]), terminated=terminated)


def _run(subject, p: Distribution, q: Distribution | None, rule: TerminationRule,
         rng: np.random.Generator, trace=None, chunk: int = CHUNK) -> RiskEstimate:
    sampler = p if q is None else q
    acc = np.zeros(6)
    rhw = rule.kind == "rhw"
    writer = None
    if trace is not None:
        writer = csv.writer(trace)
        writer.writerow(["index", "x", "weight", "indicator", "running_value"])
    while True:
        size = min(chunk, rule.cap - int(acc[_N]))
        xs = sampler.sample(rng, size)
        phi = np.asarray(subject.failures(xs), dtype=np.float64)
        if q is None:
            w = np.ones(size)
        else:
            w = p.pdf(xs) / q.pdf(xs)
        contrib = phi * w
        start_n, start_sum = int(acc[_N]), acc[_SUM]
        used, stop = _scan(contrib, phi, acc, rhw, rule.cap, rule.confidence_z, rule.s_r,
                           rule.n_min, rule.min_failures)
        if writer is not None:
            idx = start_n + 1 + np.arange(used)
            running = (start_sum + np.cumsum(contrib[:used])) / idx
            for row in zip(idx, xs[:used], w[:used], phi[:used].astype(int), running):
                writer.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2])),
                                 row[3], repr(float(row[4]))])
        if stop:
            n = int(acc[_N])
            terminated = not (rhw and n >= rule.n_max and not _rhw_stop(
                n, int(acc[_FAIL]), acc[_SUM] / n, acc[_M2], rule.confidence_z, rule.s_r,
                rule.n_min, rule.min_failures))
            return _estimate(acc, terminated)


def run_monte_carlo(subject, p: Distribution, rule: TerminationRule,
                    rng: np.random.Generator, trace=None) -> RiskEstimate:
    """Nominal Monte Carlo: x ~ p, unit weights, running mean of failure indicators."""
    return _run(subject, p, None, rule, rng, trace)


def run_importance_sampling(subject, p: Distribution, q: Distribution, rule: TerminationRule,
                            rng: np.random.Generator, trace=None) -> RiskEstimate:
    """Importance sampling: x ~ q, each failure weighted by p(x)/q(x)."""
    return _run(subject, p, q, rule, rng, trace)
