import json
import statistics

import pytest

from univmod.bounds import binary_entropy
from univmod.harness import (
    ROW_FIELDS,
    ExperimentPlan,
    PlanEntry,
    PlanError,
    RunRecord,
    aggregate_rows,
    capacity_reference,
    read_csv,
    render_csv,
    run_plan,
    sweep_csv,
    sweep_rates,
    trial_seed,
)
from univmod.scheme import SchemeConfig


def cfg(n=1024, K=6, q=2, seed=0):
    return SchemeConfig(n=n, q=q, K=K, epsilon=0.05, seed=seed)


def test_single_zero_noise_trial():
    record = run_plan(ExperimentPlan((PlanEntry(cfg(), "zero", 1),)))
    assert record.aggregate["trials"] == 1
    assert record.aggregate["error_rate"] == 0
    assert record.floor_violations == 0
    assert set(record.rows[0]) == set(ROW_FIELDS)


def test_row_count_and_order():
    entries = tuple(PlanEntry(cfg(n=256, K=4), noise, 100) for noise in ("zero", "bern:p=0.02", "periodic:pattern=01"))
    record = run_plan(ExperimentPlan(entries))
    assert len(record.rows) == 300
    assert [(r["entry"], r["trial"]) for r in record.rows] == [(e, t) for e in range(3) for t in range(100)]


def test_replay_is_byte_identical(tmp_path):
    plan = ExperimentPlan((PlanEntry(cfg(seed=7), "bern:p=0.05", 4), PlanEntry(cfg(K=5), "test:k=3,d=1", 2)))
    plan.save(tmp_path / "plan.json")
    a = ExperimentPlan.from_dict(json.loads((tmp_path / "plan.json").read_text()), out=str(tmp_path / "a.csv"))
    b = ExperimentPlan.load(tmp_path / "plan.json")
    b = ExperimentPlan(b.entries, str(tmp_path / "b.csv"))
    assert a.hash == b.hash == plan.hash
    run_plan(a)
    run_plan(b, jobs=2)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    plan_hash, rows = read_csv(tmp_path / "a.csv")
    assert plan_hash == plan.hash and len(rows) == 6


def test_aggregates_recomputed_from_csv(tmp_path):
    plan = ExperimentPlan((PlanEntry(cfg(), "bern:p=0.02", 5),), str(tmp_path / "r.csv"))
    record = run_plan(plan)
    _, rows = read_csv(tmp_path / "r.csv")
    assert aggregate_rows(rows) == record.aggregate
    assert record.aggregate["median_R_act"] == statistics.median(float(r["R_act"]) for r in rows)


def test_floor_violation_counted_for_error_free_rows_only():
    base = {"R_act": 0.1, "B": 1, "K": 4, "n": 100, "rate_floor": 0.5}
    rows = [{**base, "error": 0}, {**base, "error": 1}, {**base, "error": "0", "rate_floor": 0.01}]
    assert aggregate_rows(rows)["floor_violations"] == 1
    assert RunRecord("h", rows).floor_violations == 1
    assert aggregate_rows([])["trials"] == 0


def test_plan_validation():
    with pytest.raises(PlanError):
        ExperimentPlan(())
    with pytest.raises(PlanError):
        ExperimentPlan((PlanEntry(cfg(), "zero", 0),))
    with pytest.raises(PlanError):
        ExperimentPlan((PlanEntry(cfg(), "zero", 1),), format="xml")
    with pytest.raises(PlanError):
        ExperimentPlan((PlanEntry(cfg(q=2), "iid:dist=0.5/0.25/0.25", 1),))


def test_plan_hash_ignores_output_path():
    entries = (PlanEntry(cfg(), "zero", 1),)
    assert ExperimentPlan(entries, "a.csv").hash == ExperimentPlan(entries, "b.csv").hash
    assert ExperimentPlan(entries).hash != ExperimentPlan((PlanEntry(cfg(seed=1), "zero", 1),)).hash


def test_trial_seeds_distinct():
    seeds = {trial_seed(0, e, t) for e in range(10) for t in range(100)}
    assert len(seeds) == 1000
    assert trial_seed(5, 1, 2) == trial_seed(5, 1, 2)


def test_render_csv_header():
    text = render_csv([], "abc")
    assert text.splitlines() == ["# plan_hash=abc", ",".join(ROW_FIELDS)]


def test_capacity_reference():
    assert capacity_reference("bern:p=0.11", 2) == pytest.approx(1 - binary_entropy(0.11))
    assert capacity_reference("bern:p=0.11", 2) == pytest.approx(0.5002, abs=2e-4)
    assert capacity_reference("zero", 2) is None
    assert capacity_reference("iid:dist=0.25/0.25/0.25/0.25", 4) == pytest.approx(0.0)


def test_sweep_zero_noise_r_emp_grows():
    table = sweep_rates(2, "zero", [2 ** 10, 2 ** 12, 2 ** 14], 8, 0.05, trials=1)
    r = [row["median_r_emp"] for row in table]
    assert r == sorted(r) and r[-1] > 0.8
    assert all(row["capacity_ref"] == "" for row in table)
    text = sweep_csv(table)
    assert text.splitlines()[0].startswith("n,trials,median_R_act")


def test_sweep_rates_increase_on_bernoulli():
    table = sweep_rates(2, "bern:p=0.11", [2 ** 11, 2 ** 13], 10, 0.05, trials=2)
    assert table[0]["median_R_act"] < table[1]["median_R_act"]
    assert table[0]["capacity_ref"] == pytest.approx(0.5002, abs=2e-4)
    assert 0.08 < table[1]["p_hat"] < 0.14
    with pytest.raises(PlanError):
        sweep_rates(2, "zero", [], 4, 0.05)
