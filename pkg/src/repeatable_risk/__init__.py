"""Repeatable, fixed-budget importance-sampling risk estimation for black-box test subjects."""

from .distributions import (Categorical, Mixture1D, TruncatedNormal1D, Uniform1D, density,
                            draw, kl_divergence, tail_prob_log_ratio)
from .estimators import (RiskEstimate, TerminationRule, check_rhw, run_importance_sampling,
                         run_monte_carlo)
from .harness import CampaignConfig, compare_variants, pairwise_equal_rate, run_campaign
from .oracle import GroundTruth, enumerate_risk, exact_risk_categorical
from .planner import (BudgetPlan, PlannerParams, RoundingGrid, direct_sample_size, make_grid,
                      plan_budget, repeatability_failure_prob)
from .rounding import RoundedEstimate, round_estimate, rounding_offset_bound
from .subjects import (CategoricalSubject, PendulumParams, PendulumSubject, categorical_failure,
                       make_controller, make_lqr, make_nmpc, make_pid)

__version__ = "0.1.0"
