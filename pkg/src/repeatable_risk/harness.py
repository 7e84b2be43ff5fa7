"""Campaigns: many independent executions of one estimator variant per subject.

Variants
--------
mc        nominal Monte Carlo with a fixed_n or rhw rule
is_rhw    importance sampling stopped by the relative half-width rule
alg3      planned budget n = ceil(exp(D + c)), importance sampling, grid rounding
direct_sq distribution-free budget, grid rounding

Reports are plain files: ``trials.csv`` (one row per execution),
``summary.json`` (plan, grid, per-subject statistics) and ``timings.csv``
(wall-clock times, kept apart so the first two are byte-reproducible).
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .distributions import (Distribution, LogRatioProfile, distribution_from_config,
                            distribution_to_config)
from .errors import ConfigError, PlannerDivergedError
from .estimators import TerminationRule, run_importance_sampling, run_monte_carlo
from .oracle import GroundTruth, cached_enumerate_risk
from .planner import (BudgetPlan, PlannerParams, RoundingGrid, direct_sample_size,
                      make_grid, plan_budget, repeatability_failure_prob)
from .rounding import round_estimate
from .rng import trial_stream
from .subjects import subjects_from_config

log = logging.getLogger(__name__)

VARIANTS = ("mc", "is_rhw", "alg3", "direct_sq")


@dataclass
class CampaignConfig:
    subject: dict
    p: dict
    q: dict | None = None
    variant: str = "alg3"
    controllers: list | None = None
    planner: dict = field(default_factory=dict)
    rhw: dict = field(default_factory=dict)
    fixed_n: int | None = None
    trials: int = 100
    master_seed: int = 0
    grid_seed: int = 0
    ground_truth: dict = field(default_factory=lambda: {"enabled": True, "resolution": 0.002})
    output: dict = field(default_factory=dict)
    workers: int = 1
    compare: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.variant in ("is_rhw", "alg3") and self.q is None:
            raise ConfigError(f"variant {self.variant} needs an importance distribution q")
        if self.variant == "is_rhw" and "s_r" not in self.rhw:
            raise ConfigError("variant is_rhw needs rhw.s_r")
        if self.variant == "direct_sq" and "epsilon" not in self.planner:
            raise ConfigError("variant direct_sq needs planner.epsilon")
        if self.variant == "mc" and self.fixed_n is None and "s_r" not in self.rhw:
            raise ConfigError("variant mc needs fixed_n or rhw.s_r")

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str) -> "CampaignConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def planner_params(self) -> PlannerParams:
        try:
            return PlannerParams(**self.planner)
        except TypeError as exc:
            raise ConfigError(f"bad planner block: {exc}") from exc

    def rhw_rule(self) -> TerminationRule:
        return TerminationRule.rhw(**self.rhw)


@dataclass(frozen=True)
class TrialRecord:
    subject: str
    trial_index: int
    seed: int
    raw_estimate: float
    rounded_estimate: float | None
    sample_count: int
    failure_count: int
    terminated: bool
    wall_time: float = 0.0


@dataclass
class SubjectSummary:
    subject: str
    trials: int
    modal_output: float
    modal_share: float
    pairwise_equal_rate: float
    distinct_outputs: int
    mean_output: float
    min_sample_count: int
    max_sample_count: int
    mean_sample_count: float
    sample_count_cv: float
    non_terminated: int
    r_star: float | None = None
    max_abs_error: float | None = None


@dataclass
class CampaignSummary:
    variant: str
    subjects: dict
    plan: BudgetPlan | None = None
    planned_n: int | None = None
    grid: RoundingGrid | None = None
    hoeffding_failure_prob: float | None = None
    warnings: list = field(default_factory=list)
    records: list = field(default_factory=list, repr=False)
    truths: dict = field(default_factory=dict, repr=False)

    def table(self) -> list[dict]:
        """Per-subject comparison rows."""
        return [asdict(s) for s in self.subjects.values()]

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "plan": self.plan.as_dict() if self.plan else None,
            "planned_n": self.planned_n,
            "grid": asdict(self.grid) if self.grid else None,
            "hoeffding_failure_prob": self.hoeffding_failure_prob,
            "warnings": list(self.warnings),
            "subjects": self.table(),
        }


def pairwise_equal_rate(outputs) -> float:
    """Fraction of unordered pairs whose outputs are bit-identical."""
    outputs = list(outputs)
    if not outputs:
        raise ValueError("need at least one output")
    n = len(outputs)
    if n == 1:
        return 1.0
    counts = Counter(float(o) for o in outputs)
    same = sum(c * (c - 1) // 2 for c in counts.values())
    return same / (n * (n - 1) // 2)


def summarize(subject: str, records: list[TrialRecord], truth: GroundTruth | None = None
              ) -> SubjectSummary:
    outs = [r.rounded_estimate if r.rounded_estimate is not None else r.raw_estimate
            for r in records]
    counts = Counter(outs)
    modal, share = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))
    n = np.array([r.sample_count for r in records], dtype=float)
    mean_n = float(n.mean())
    cv = float(n.std(ddof=1) / mean_n) if len(n) > 1 and mean_n > 0 else 0.0
    summary = SubjectSummary(
        subject=subject, trials=len(records), modal_output=float(modal),
        modal_share=share / len(records), pairwise_equal_rate=pairwise_equal_rate(outs),
        distinct_outputs=len(counts), mean_output=math.fsum(outs) / len(outs),
        min_sample_count=int(n.min()), max_sample_count=int(n.max()), mean_sample_count=mean_n,
        sample_count_cv=cv, non_terminated=sum(not r.terminated for r in records))
    if truth is not None:
        summary.r_star = truth.r_star
        summary.max_abs_error = max(abs(o - truth.r_star) for o in outs)
    return summary


def _estimate_once(variant, subject, p, q, rule, rng):
    if variant == "mc" or (variant == "direct_sq" and q is None):
        return run_monte_carlo(subject, p, rule, rng)
    return run_importance_sampling(subject, p, q, rule, rng)


def run_campaign(config: CampaignConfig, progress=None) -> CampaignSummary:
    """Run ``config.trials`` executions per subject and aggregate them.

    The budget and the rounding grid are fixed once per campaign; only the
    per-trial sampling stream changes between executions.
    """
    if config.workers and config.workers > 1:
        _set_threads(config.workers)
    p = distribution_from_config(config.p)
    q = distribution_from_config(config.q) if config.q is not None else None
    subjects = subjects_from_config(config.subject, config.controllers)
    params = config.planner_params() if config.variant in ("alg3", "direct_sq") else None

    summary = CampaignSummary(variant=config.variant, subjects={})
    if config.variant == "alg3":
        plan = plan_budget(p, q, params)
        summary.plan, summary.planned_n = plan, plan.n
        summary.grid = make_grid(params, "alg3", config.grid_seed)
        if not plan.feasible:
            summary.warnings.append(
                f"planned n={plan.n} exceeds gamma_cap={params.gamma_cap}")
        rule = TerminationRule.fixed(plan.n)
    elif config.variant == "direct_sq":
        summary.planned_n = direct_sample_size(params)
        summary.grid = make_grid(params, "direct", config.grid_seed)
        rule = TerminationRule.fixed(summary.planned_n)
    elif config.variant == "mc" and config.fixed_n is not None:
        rule = TerminationRule.fixed(config.fixed_n)
    else:
        rule = config.rhw_rule()
    if summary.planned_n is not None:
        summary.hoeffding_failure_prob = repeatability_failure_prob(summary.planned_n, params.tau)

    gt = config.ground_truth or {}
    for subject in subjects:
        truth = None
        if gt.get("enabled", False) and hasattr(subject, "params"):
            truth = cached_enumerate_risk(subject, p, gt.get("resolution", 0.002),
                                          gt.get("cache_dir"))
        elif gt.get("enabled", False) and hasattr(subject, "labels") and p.discrete:
            from .oracle import exact_risk_categorical
            r = exact_risk_categorical(subject, p)
            truth = GroundTruth(r, 1.0, subject.labels.size, subject.labels)
        if truth is not None:
            summary.truths[subject.name] = truth
            if params is not None and truth.r_star > params.r_bar:
                msg = (f"{subject.name}: ground-truth risk {truth.r_star:.4f} exceeds "
                       f"r_bar={params.r_bar}; the planner's premise does not hold")
                log.warning(msg)
                summary.warnings.append(msg)

        records = []
        for t in range(config.trials):
            rng = trial_stream(config.master_seed, t)
            start = time.perf_counter()
            est = _estimate_once(config.variant, subject, p, q, rule, rng)
            rounded = round_estimate(est.value, summary.grid).value if summary.grid else None
            records.append(TrialRecord(subject.name, t, config.master_seed, float(est.value),
                                       rounded, int(est.sample_count),
                                       int(est.failure_count), bool(est.terminated),
                                       time.perf_counter() - start))
            if progress is not None:
                progress(subject.name, t, records[-1])
        if params is not None and any(r.raw_estimate > params.r_bar for r in records):
            summary.warnings.append(f"{subject.name}: some raw estimates exceed r_bar={params.r_bar}")
        summary.records.extend(records)
        summary.subjects[subject.name] = summarize(subject.name, records, truth)
    return summary


def _set_threads(workers: int):
    import numba
    numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------------------
# report files

TRIAL_FIELDS = ["subject", "trial_index", "seed", "raw_estimate", "rounded_estimate",
                "sample_count", "failure_count", "terminated"]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_reports(summary: CampaignSummary, out_dir: str, config: CampaignConfig | None = None):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "trials.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_FIELDS)
        for r in summary.records:
            w.writerow([_fmt(getattr(r, f)) for f in TRIAL_FIELDS])
    with open(os.path.join(out_dir, "timings.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject", "trial_index", "wall_time"])
        for r in summary.records:
            w.writerow([r.subject, r.trial_index, f"{r.wall_time:.6f}"])
    doc = summary.to_json()
    if config is not None:
        doc["config"] = config.to_dict()
    doc["ground_truth"] = {k: {"r_star": t.r_star, "resolution": t.resolution,
                               "points_evaluated": t.points_evaluated}
                           for k, t in summary.truths.items()}
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_trials(path: str) -> list[TrialRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(TrialRecord(
                subject=row["subject"], trial_index=int(row["trial_index"]), seed=int(row["seed"]),
                raw_estimate=float(row["raw_estimate"]),
                rounded_estimate=float(row["rounded_estimate"]) if row["rounded_estimate"] else None,
                sample_count=int(row["sample_count"]), failure_count=int(row["failure_count"]),
                terminated=row["terminated"] == "1"))
    return out


def reaggregate(records: list[TrialRecord], r_stars: dict | None = None) -> dict:
    """Rebuild per-subject summaries from trial records (the ``report`` command)."""
    r_stars = r_stars or {}
    by_subject: dict[str, list] = {}
    for r in records:
        by_subject.setdefault(r.subject, []).append(r)
    out = {}
    for name, recs in by_subject.items():
        truth = None
        if name in r_stars:
            truth = GroundTruth(r_stars[name], 0.0, 0, np.zeros(0, dtype=np.uint8))
        out[name] = summarize(name, recs, truth)
    return out


# ---------------------------------------------------------------------------
# effort comparison

COMPARE_FIELDS = ["q", "beta", "tau", "r_bar", "epsilon", "kl", "c", "alg3_n", "alg3_status",
                  "direct_n", "log10_alg3_n", "log10_direct_n", "alg3_over_direct"]


def compare_variants(p: Distribution, qs: dict, taus, r_bars, beta: float = 0.4,
                     epsilon: float = 0.01, c_step: float = 0.01) -> list[dict]:
    """Planned budgets of the distribution-dependent and distribution-free planners.

    One row per (q, tau, r_bar) cell. Cells where the c-scan diverges are kept
    with ``alg3_status = "planner-diverged"``.
    """
    rows = []
    for label, q in qs.items():
        try:
            profile = LogRatioProfile(p, q)
        except ValueError as exc:
            profile, prof_err = None, str(exc)
        for tau in taus:
            for r_bar in r_bars:
                params = PlannerParams(beta=beta, tau=tau, r_bar=r_bar, c_step=c_step,
                                       epsilon=epsilon)
                direct_n = direct_sample_size(params)
                row = {"q": label, "beta": beta, "tau": tau, "r_bar": r_bar, "epsilon": epsilon,
                       "kl": None, "c": None, "alg3_n": None, "alg3_status": "ok",
                       "direct_n": direct_n, "log10_alg3_n": None,
                       "log10_direct_n": math.log10(direct_n), "alg3_over_direct": None}
                if profile is None:
                    row["alg3_status"] = f"invalid: {prof_err}"
                else:
                    try:
                        plan = plan_budget(p, q, params, profile)
                    except PlannerDivergedError:
                        row["alg3_status"] = "planner-diverged"
                    else:
                        row.update(kl=plan.kl, c=plan.c, alg3_n=plan.n,
                                   log10_alg3_n=math.log10(plan.n),
                                   alg3_over_direct=plan.n / direct_n)
                rows.append(row)
    return rows


def write_compare_csv(rows: list[dict], path: str):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARE_FIELDS)
        for row in rows:
            w.writerow([_fmt(row[f]) for f in COMPARE_FIELDS])
