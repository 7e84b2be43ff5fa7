"""Fixed sample budgets for repeatable risk estimation.

Two planners:

* ``plan_budget`` uses the nominal and importance laws: it scans the
  fluctuation constant c upward until the accuracy inequality holds, and
  sets n = ceil(exp(D(p||q) + c)).
* ``direct_sample_size`` ignores the laws and uses the generic
  reproducible-query sample size.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .distributions import Distribution, LogRatioProfile, kl_divergence
from .errors import PlannerDivergedError, PlannerParameterError
from .rng import grid_stream

C_LIMIT = 200.0


@dataclass(frozen=True)
class PlannerParams:
    beta: float = 0.4
    tau: float = 0.1
    r_bar: float = 0.3
    c_step: float = 0.01
    gamma_cap: int | None = None
    epsilon: float = 0.01

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise PlannerParameterError("beta must be in (0, 1)")
        if not 0 < self.tau <= 1:
            raise PlannerParameterError("tau must be in (0, 1]")
        if not 0 < self.r_bar <= 1:
            raise PlannerParameterError("r_bar must be in (0, 1]")
        if not self.c_step > 0:
            raise PlannerParameterError("c_step must be positive")
        if not 0 < self.epsilon < 1:
            raise PlannerParameterError("epsilon must be in (0, 1)")
        if self.gamma_cap is not None and self.gamma_cap < 1:
            raise PlannerParameterError("gamma_cap must be a positive integer")

    @property
    def target(self) -> float:
        """Allowed expected error of the raw estimate: beta*tau/(beta+1)."""
        return self.beta * self.tau / (self.beta + 1)


@dataclass(frozen=True)
class BudgetPlan:
    kl: float
    c: float
    n: int
    feasible: bool
    lhs_at_c: float
    steps: int

    def as_dict(self) -> dict:
        return asdict(self)


def error_bound(r_bar: float, c: float, tail: float) -> float:
    """r_bar * (exp(-c/4) + 2 sqrt(tail)) -- the bound compared against beta*tau/(beta+1)."""
    return r_bar * (math.exp(-c / 4.0) + 2.0 * math.sqrt(tail))


def plan_budget(p: Distribution, q: Distribution, params: PlannerParams,
                profile: LogRatioProfile | None = None) -> BudgetPlan:
    kl = kl_divergence(p, q)
    profile = profile or LogRatioProfile(p, q)
    target = params.target
    k = 0
    while True:
        c = k * params.c_step
        if c > C_LIMIT:
            raise PlannerDivergedError(
                f"no c <= {C_LIMIT} satisfies the accuracy bound (D={kl:.4g}); "
                "the importance law is badly matched to the nominal law")
        lhs = error_bound(params.r_bar, c, profile.tail(kl + c / 2.0))
        if lhs <= target:
            break
        k += 1
    n = max(1, math.ceil(math.exp(kl + c)))
    feasible = True
    if params.gamma_cap is not None:
        feasible = c <= -kl + math.log(params.gamma_cap)
    return BudgetPlan(kl=kl, c=c, n=n, feasible=feasible, lhs_at_c=lhs, steps=k)


def direct_sample_size(params: PlannerParams) -> int:
    """ceil(4 ln(2/eps) / (2 tau^2 (beta - 2 eps)^2)), independent of p and q."""
    gap = params.beta - 2 * params.epsilon
    if gap <= 0:
        raise PlannerParameterError("direct sample size needs beta > 2*epsilon")
    return math.ceil(4 * math.log(2 / params.epsilon) / (2 * params.tau**2 * gap**2))


@dataclass(frozen=True)
class RoundingGrid:
    alpha: float
    alpha0: float

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if not 0 <= self.alpha0 <= self.alpha:
            raise ValueError("alpha0 must lie in [0, alpha]")


def grid_width(params: PlannerParams, variant: str = "alg3") -> float:
    if variant == "alg3":
        return 2 * params.tau / (params.beta + 1)
    if variant == "direct":
        gap = params.beta + 1 - 2 * params.epsilon
        return 2 * params.tau / gap
    raise ValueError(f"unknown grid variant {variant!r}")


def make_grid(params: PlannerParams, variant: str = "alg3", grid_seed: int = 0) -> RoundingGrid:
    """Interval width from (beta, tau[, epsilon]); first-interval width from grid_seed only."""
    alpha = grid_width(params, variant)
    alpha0 = float(grid_stream(grid_seed).uniform(0.0, alpha))
    return RoundingGrid(alpha, alpha0)


def repeatability_failure_prob(n: int, tau: float) -> float:
    """Hoeffding bound 2 exp(-2 n tau^2), capped at 1."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return min(1.0, 2.0 * math.exp(-2.0 * n * tau * tau))
