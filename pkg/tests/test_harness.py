import csv
import dataclasses
import json

import pytest

from outlier_arms import ExperimentConfig, ParameterError, Params, SyntheticSpec
from outlier_arms.harness import (
    GOLD,
    RR_KSIGMA,
    replay_trial,
    run_experiment,
    set_scores,
    summarize,
    sweep_grid,
    write_sweep,
    write_summary,
    write_trials,
)


def gold_config(**overrides):
    base = dict(
        params=Params(epsilon=5.0, rho=0.8, delta=0.1),
        instance=SyntheticSpec(n=10, epsilon=5.0, rho=0.8, outlier_type="upper", seed=4),
        algorithm=GOLD,
        trials=3,
        base_seed=100,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_set_scores_edge_cases():
    assert set_scores(set(), set()) == (1.0, 1.0, 1.0)
    assert set_scores(set(), {1}) == (0.0, 0.0, 0.0)
    assert set_scores({1}, set())[0] == 0.0
    p, r, f1 = set_scores({1, 2}, {2, 3})
    assert (p, r) == (0.5, 0.5)
    assert f1 == pytest.approx(0.5)


def test_run_experiment_gold_scores_and_summary():
    summary, results, arm_set = run_experiment(gold_config())
    assert summary.trials == 3
    assert len(results) == 3
    assert summary.correctness == pytest.approx(
        sum(r.correct for r in results) / 3
    )
    for t, r in enumerate(results):
        assert r.seed == 100 + t
        assert r.algorithm == GOLD
        assert len(r.ranking) == arm_set.n
        assert set(r.s_scores) == set(r.terminated)
        assert not r.truncated


def test_trials_are_replayable_bit_identically():
    config = gold_config()
    _, results, _ = run_experiment(config)
    again = replay_trial(config, results[1].seed)
    a = dataclasses.asdict(results[1])
    b = dataclasses.asdict(again)
    a.pop("wall_time")
    b.pop("wall_time")
    assert a == b


def test_rr_experiment_uses_flagged_sets():
    config = gold_config(algorithm=RR_KSIGMA, k=2.0, max_pulls=500_000, trials=2)
    summary, results, _ = run_experiment(config)
    for r in results:
        assert r.algorithm == RR_KSIGMA
        assert r.ranking == ()
        assert r.s_scores == {}
    assert 0.0 <= summary.correctness <= 1.0


def test_summarize_math():
    _, results, _ = run_experiment(gold_config(trials=2))
    s = summarize(results)
    pulls = [r.total_pulls for r in results]
    assert s.mean_pulls == pytest.approx(sum(pulls) / 2)
    assert s.trials == 2


def test_config_validation():
    with pytest.raises(ParameterError):
        gold_config(algorithm="simulated-annealing")
    with pytest.raises(ParameterError):
        gold_config(trials=0)


def test_means_file_instances(tmp_path):
    path = tmp_path / "means.csv"
    rows = [f"{i},{0.1 + 0.01 * i}" for i in range(9)] + ["9,0.95"]
    path.write_text("\n".join(rows) + "\n")
    config = gold_config(instance=str(path), trials=2)
    summary, results, arm_set = run_experiment(config)
    assert arm_set.n == 10
    assert summary.correctness == 1.0


def test_write_and_reload_artifacts(tmp_path):
    summary, results, _ = run_experiment(gold_config(trials=2))
    tp = tmp_path / "trials.jsonl"
    sp = tmp_path / "summary.csv"
    write_trials(tp, results)
    write_summary(sp, summary)
    lines = tp.read_text().strip().splitlines()
    assert len(lines) == 2
    rec = json.loads(lines[0])
    assert rec["algorithm"] == GOLD
    assert rec["total_pulls"] == results[0].total_pulls
    assert rec["ranking"] == list(results[0].ranking)
    with sp.open() as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["correctness"]) == summary.correctness
    assert int(rows[0]["trials"]) == 2


def test_graph_dump_writes_activity_log(tmp_path):
    dump = tmp_path / "graph.log"
    config = gold_config(trials=1, graph_dump=dump, max_pulls=2000)
    run_experiment(config)
    lines = dump.read_text().strip().splitlines()
    assert lines, "dump should not be empty"
    assert lines[0].startswith("T=")
    assert any("removed=" in ln for ln in lines)


def test_sweep_grid_single_cell_and_errors(tmp_path):
    rows = sweep_grid(
        ns=[10], epsilons=[5.0], outlier_types=["upper"], algorithms=[GOLD, RR_KSIGMA],
        rho=0.8, delta=0.1, trials=2, base_seed=0, k_grid=(2.0,),
        max_pulls=400_000, instance_seed=4,
    )
    assert len(rows) == 2
    gold_row = next(r for r in rows if r["algorithm"] == GOLD)
    assert gold_row["error"] == ""
    assert gold_row["correctness"] is not None
    # an infeasible cell reports its error and the sweep keeps going
    rows = sweep_grid(
        ns=[100], epsilons=[200.0], outlier_types=["upper"], algorithms=[GOLD],
        rho=0.9, delta=0.1, trials=1, base_seed=0, instance_seed=1,
    )
    assert len(rows) == 1
    assert "GenerationError" in rows[0]["error"]
    out = tmp_path / "sweep.csv"
    write_sweep(out, rows)
    with out.open() as fh:
        parsed = list(csv.DictReader(fh))
    assert parsed[0]["error"].startswith("GenerationError")
