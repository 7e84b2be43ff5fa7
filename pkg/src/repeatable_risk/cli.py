"""Command-line entry point: ``repeatable-risk {plan,truth,run,compare,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict

from .distributions import distribution_from_config
from .errors import ConfigError, PlannerDivergedError, PlannerParameterError
from .harness import (CampaignConfig, compare_variants, reaggregate, read_trials,
                      run_campaign, write_compare_csv, write_reports)
from .oracle import cached_enumerate_risk
from .planner import direct_sample_size, make_grid, plan_budget, repeatability_failure_prob
from .subjects import subjects_from_config

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_EXHAUSTED = 0, 2, 3, 4


def _load(args) -> CampaignConfig:
    cfg = CampaignConfig.load(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.grid_seed is not None:
        cfg.grid_seed = args.grid_seed
    if args.workers is not None:
        cfg.workers = args.workers
    return cfg


def _out_dir(args, cfg) -> str:
    return args.out or cfg.output.get("dir") or "."


def cmd_plan(args) -> int:
    cfg = _load(args)
    params = cfg.planner_params()
    doc = {"planner": asdict(params)}
    if cfg.q is not None:
        p, q = distribution_from_config(cfg.p), distribution_from_config(cfg.q)
        plan = plan_budget(p, q, params)
        doc["alg3"] = plan.as_dict()
        doc["alg3"]["grid"] = asdict(make_grid(params, "alg3", cfg.grid_seed))
        doc["alg3"]["hoeffding_failure_prob"] = repeatability_failure_prob(plan.n, params.tau)
        if not plan.feasible:
            print(json.dumps(doc, indent=2))
            return EXIT_INFEASIBLE
    try:
        doc["direct_sq"] = {"n": direct_sample_size(params),
                            "grid": asdict(make_grid(params, "direct", cfg.grid_seed))}
    except PlannerParameterError as exc:
        doc["direct_sq"] = {"error": str(exc)}
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_truth(args) -> int:
    cfg = _load(args)
    p = distribution_from_config(cfg.p)
    gt = cfg.ground_truth or {}
    resolution = args.resolution or gt.get("resolution", 0.002)
    cache = gt.get("cache_dir") or os.path.join(_out_dir(args, cfg), "truth_cache")
    rows = []
    for subject in subjects_from_config(cfg.subject, cfg.controllers):
        t = cached_enumerate_risk(subject, p, resolution, cache)
        rows.append({"subject": subject.name, "r_star": t.r_star, "resolution": t.resolution,
                     "points_evaluated": t.points_evaluated})
    print(json.dumps(rows, indent=2))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)

    def progress(name, t, rec):
        logging.getLogger("repeatable_risk").debug(
            "%s trial %d: raw=%r rounded=%r n=%d", name, t, rec.raw_estimate,
            rec.rounded_estimate, rec.sample_count)

    summary = run_campaign(cfg, progress=progress)
    write_reports(summary, out, cfg)
    for row in summary.table():
        print(json.dumps(row))
    for w in summary.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if any(s.non_terminated for s in summary.subjects.values()):
        return EXIT_EXHAUSTED
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load(args)
    cmp = cfg.compare or {}
    p = distribution_from_config(cfg.p)
    qs = {"p=q": p} if cmp.get("include_p", True) else {}
    for label, block in (cmp.get("qs") or {}).items():
        qs[label] = distribution_from_config(block)
    if not cmp.get("qs") and cfg.q is not None:
        qs["q"] = distribution_from_config(cfg.q)
    params = cfg.planner_params()
    rows = compare_variants(p, qs, cmp.get("taus", [0.05, 0.1, 0.2]),
                            cmp.get("r_bars", [0.1, 0.3, 0.5]), beta=params.beta,
                            epsilon=params.epsilon, c_step=params.c_step)
    out = _out_dir(args, cfg)
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "compare.csv")
    write_compare_csv(rows, path)
    print(path)
    return EXIT_OK


def cmd_report(args) -> int:
    path = args.trials or os.path.join(args.out or ".", "trials.csv")
    r_stars = {}
    summary_path = os.path.join(os.path.dirname(path), "summary.json")
    if os.path.exists(summary_path):
        with open(summary_path) as fh:
            r_stars = {k: v["r_star"] for k, v in json.load(fh).get("ground_truth", {}).items()}
    for name, s in reaggregate(read_trials(path), r_stars).items():
        print(json.dumps(asdict(s)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="repeatable-risk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "plan": (cmd_plan, "print the sample budget and rounding grid"),
        "truth": (cmd_truth, "enumerate (and cache) ground-truth risks"),
        "run": (cmd_run, "run a campaign and write reports"),
        "compare": (cmd_compare, "sweep budgets of both planners into compare.csv"),
        "report": (cmd_report, "re-aggregate summaries from trials.csv"),
    }
    for name, (fn, help_) in commands.items():
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--config", required=name != "report")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--grid-seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out")
        sp.add_argument("--verbose", "-v", action="store_true")
        if name == "truth":
            sp.add_argument("--resolution", type=float)
        if name == "report":
            sp.add_argument("--trials", help="path to trials.csv")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PlannerParameterError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PlannerDivergedError as exc:
        print(f"planner infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
