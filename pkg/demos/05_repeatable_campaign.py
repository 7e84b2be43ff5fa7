"""
A repeatable campaign against an RHW campaign
=============================================

Twenty executions of the planned-budget procedure against the LQR pendulum
give one output and one sample count. Twenty RHW-terminated executions give
many. Reports land in ./demo_out.
"""

from repeatable_risk.harness import CampaignConfig, run_campaign, write_reports

base = {
    "subject": {"kind": "pendulum"},
    "controllers": ["lqr"],
    "p": {"preset": "pendulum_nominal"},
    "q": {"preset": "pendulum_q1"},
    "trials": 20,
    "ground_truth": {"enabled": True, "resolution": 0.002, "cache_dir": "demo_out/truth_cache"},
}

alg3 = CampaignConfig.from_dict(dict(base, variant="alg3",
                                     planner={"beta": 0.4, "tau": 0.1, "r_bar": 0.3}))
rhw = CampaignConfig.from_dict(dict(base, variant="is_rhw", rhw={"s_r": 0.01}))

for label, cfg in (("alg3", alg3), ("is_rhw", rhw)):
    s = run_campaign(cfg)
    write_reports(s, f"demo_out/{label}", cfg)
    row = s.subjects["lqr"]
    print(f"{label:7s} outputs: {row.distinct_outputs} distinct, pairwise equal rate "
          f"{row.pairwise_equal_rate:.3f}, samples {row.min_sample_count}..{row.max_sample_count}, "
          f"r*={row.r_star:.4f}, max|err|={row.max_abs_error:.4f}")
    for w in s.warnings:
        print("  warning:", w)
