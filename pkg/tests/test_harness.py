import csv
import json
import math

import pytest

from repeatable_risk.distributions import Categorical, PRESETS
from repeatable_risk.errors import ConfigError
from repeatable_risk.harness import (COMPARE_FIELDS, CampaignConfig, compare_variants,
                                     pairwise_equal_rate, reaggregate, read_trials, run_campaign,
                                     write_compare_csv, write_reports)
from repeatable_risk.planner import repeatability_failure_prob

TWO_POINT = {
    "subject": {"kind": "categorical", "failure_labels": [0, 1]},
    "p": {"kind": "categorical", "probabilities": [0.7, 0.3]},
    "q": {"kind": "categorical", "probabilities": [0.5, 0.5]},
    "planner": {"beta": 0.4, "tau": 0.1, "r_bar": 0.3, "epsilon": 0.01},
    "rhw": {"s_r": 0.05},
    "trials": 100,
}


def config(**overrides):
    d = json.loads(json.dumps(TWO_POINT))
    d.update(overrides)
    return CampaignConfig.from_dict(d)


def test_pairwise_examples():
    assert pairwise_equal_rate([0.25, 0.25, 0.25]) == 1.0
    assert pairwise_equal_rate([0.25, 0.35]) == 0.0
    assert pairwise_equal_rate([0.25, 0.25, 0.35]) == pytest.approx(1 / 3)
    assert pairwise_equal_rate([0.1]) == 1.0
    with pytest.raises(ValueError):
        pairwise_equal_rate([])


def test_alg3_categorical_is_repeatable():
    s = run_campaign(config(variant="alg3"))
    summary = s.subjects["categorical"]
    assert summary.modal_share == 1.0 and summary.pairwise_equal_rate == 1.0
    assert repeatability_failure_prob(s.planned_n, 0.1) < 1e-100
    assert summary.min_sample_count == summary.max_sample_count == s.planned_n
    assert summary.max_abs_error <= 0.1
    assert summary.r_star == pytest.approx(0.3)


def test_direct_variant_has_fixed_budget():
    s = run_campaign(config(variant="direct_sq", trials=20))
    assert s.planned_n == 7339
    assert all(r.sample_count == 7339 for r in s.records)
    assert s.grid.alpha == pytest.approx(0.2 / 1.38)


def test_single_trial():
    s = run_campaign(config(variant="is_rhw", trials=1))
    assert s.subjects["categorical"].modal_share == 1.0


def test_rhw_variant_spreads_sample_counts():
    s = run_campaign(config(variant="is_rhw", trials=40))
    summary = s.subjects["categorical"]
    assert summary.distinct_outputs >= 2
    assert summary.sample_count_cv > 0.01


def test_mc_fixed_variant():
    s = run_campaign(config(variant="mc", fixed_n=500, trials=5))
    assert [r.sample_count for r in s.records] == [500] * 5
    assert all(r.rounded_estimate is None for r in s.records)


def test_r_bar_warning():
    s = run_campaign(config(variant="alg3", trials=3,
                            planner={"beta": 0.4, "tau": 0.1, "r_bar": 0.2}))
    assert any("exceeds r_bar" in w for w in s.warnings)


def test_infeasible_cap_is_reported():
    s = run_campaign(config(variant="alg3", trials=2,
                            planner={"beta": 0.4, "tau": 0.1, "r_bar": 0.3, "gamma_cap": 100}))
    assert not s.plan.feasible and s.warnings


@pytest.mark.parametrize("bad", [
    {"variant": "bogus"}, {"trials": 0}, {"variant": "is_rhw", "rhw": {}},
    {"variant": "direct_sq", "planner": {}}, {"variant": "alg3", "q": None},
    {"variant": "mc", "rhw": {}}, {"colour": "red"},
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        config(**bad)


def test_campaign_reports_byte_identical(tmp_path):
    for name in ("a", "b"):
        cfg = config(variant="alg3", trials=10)
        write_reports(run_campaign(cfg), str(tmp_path / name), cfg)
    for f in ("trials.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_reports_round_trip(tmp_path):
    cfg = config(variant="is_rhw", trials=8)
    s = run_campaign(cfg)
    write_reports(s, str(tmp_path), cfg)
    records = read_trials(str(tmp_path / "trials.csv"))
    assert [r.raw_estimate for r in records] == [r.raw_estimate for r in s.records]
    again = reaggregate(records, {"categorical": 0.3})["categorical"]
    original = s.subjects["categorical"]
    assert again.pairwise_equal_rate == original.pairwise_equal_rate
    assert again.max_abs_error == original.max_abs_error


def test_master_seed_changes_draws():
    a = run_campaign(config(variant="is_rhw", trials=3, master_seed=1))
    b = run_campaign(config(variant="is_rhw", trials=3, master_seed=2))
    assert [r.raw_estimate for r in a.records] != [r.raw_estimate for r in b.records]


def test_pendulum_alg3_small_campaign(tmp_path):
    cfg = CampaignConfig.from_dict({
        "subject": {"kind": "pendulum"}, "controllers": ["lqr"],
        "p": {"preset": "pendulum_nominal"}, "q": {"preset": "pendulum_q1"},
        "variant": "alg3", "planner": {"beta": 0.4, "tau": 0.1, "r_bar": 0.3}, "trials": 3,
        "ground_truth": {"enabled": True, "resolution": 0.002, "cache_dir": str(tmp_path)}})
    s = run_campaign(cfg)
    lqr = s.subjects["lqr"]
    assert lqr.pairwise_equal_rate == 1.0
    assert lqr.max_abs_error <= 0.1
    assert lqr.min_sample_count == lqr.max_sample_count == s.planned_n


# -- effort comparison -------------------------------------------------------

def test_compare_reference_cell(nominal):
    rows = compare_variants(nominal, {"p=q": nominal}, [0.1], [0.3])
    (row,) = rows
    assert row["direct_n"] == 7339
    assert row["alg3_n"] == math.ceil(math.exp(9.41))
    assert row["alg3_status"] == "ok"
    assert row["log10_direct_n"] == pytest.approx(math.log10(7339))


def test_compare_marks_diverged_cells():
    p = Categorical((0.5, 0.5))
    rows = compare_variants(p, {"bad": Categorical((1 - 1e-200, 1e-200)), "p=q": p}, [0.1], [0.3])
    status = {r["q"]: r["alg3_status"] for r in rows}
    assert status == {"bad": "planner-diverged", "p=q": "ok"}


def test_compare_csv(tmp_path, nominal):
    rows = compare_variants(nominal, {"p=q": nominal, "q1": PRESETS["pendulum_q1"]()},
                            [0.05, 0.1], [0.1, 0.3])
    path = tmp_path / "compare.csv"
    write_compare_csv(rows, str(path))
    with open(path) as fh:
        got = list(csv.DictReader(fh))
    assert len(got) == 8 and list(got[0]) == COMPARE_FIELDS
