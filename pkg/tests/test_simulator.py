from pathlib import Path

import pytest

from fogmatch.matching import InfeasibleQuotaError
from fogmatch.simulator import (
    ConfigError,
    ExperimentConfig,
    csv_header,
    export_csv,
    generate_scenario,
    render_csv,
    run_experiment,
    run_one,
)

DATA = Path(__file__).parent / "data"
ROOT = Path(__file__).parent.parent


def test_scenario_is_deterministic():
    cfg = ExperimentConfig()
    a = generate_scenario(cfg, 120, 9)
    b = generate_scenario(cfg, 120, 9)
    assert a.to_json() == b.to_json()
    assert a.to_json() != generate_scenario(cfg, 120, 10).to_json()


def test_paper_scale_scenario_shape():
    cfg = ExperimentConfig()
    s = generate_scenario(cfg, 500, 0)
    assert s.n_fogs == 5 and s.n_users == 500
    lo, hi = cfg.task_size_range
    for u in s.users:
        # 5..15 tasks of size lo..hi each
        assert 5 * lo <= u.task_size <= 15 * hi
        assert u.tx_payload == pytest.approx(u.task_size * cfg.payload_bits_per_work_unit)
        assert all(0 <= c <= cfg.area_side for c in u.position)
    assert len({f.capacity for f in s.fogs}) == 5
    assert all(0 <= f.q_min <= 100 for f in s.fogs)
    assert sum(f.q_min for f in s.fogs) <= 500 <= sum(f.q_max for f in s.fogs)


def test_task_counts_within_range():
    # a single work unit per task makes the task count recoverable from the total
    cfg = ExperimentConfig(task_size_range=(1.0, 1.0))
    counts = {u.task_size for u in generate_scenario(cfg, 400, 2).users}
    assert counts <= set(float(n) for n in range(5, 16))
    assert {5.0, 15.0} <= counts


def test_drawn_capacities_are_distinct():
    cfg = ExperimentConfig(capacity_values=(), capacity_range=(1e9, 2e9))
    caps = [f.capacity for f in generate_scenario(cfg, 10, 0).fogs]
    assert len(set(caps)) == 5 and all(1e9 <= c <= 2e9 for c in caps)


def test_fixed_quotas_infeasible():
    cfg = ExperimentConfig(quota_policy="fixed", q_min_fixed=10, q_max_fixed=20)
    with pytest.raises(InfeasibleQuotaError):
        generate_scenario(cfg, 20, 0)
    res = run_one(cfg, "msda", 20, 0)
    assert res.error and "InfeasibleQuotaError" in res.error


def test_run_experiment_single_row():
    cfg = ExperimentConfig(user_counts=(40,), seeds=(1,), policies=("msda",))
    rows = run_experiment(cfg)
    assert len(rows) == 1
    r = rows[0]
    assert r.violations == 0 and r.unmatched == 0
    assert r.delta_p == pytest.approx(max(r.fog_loads) - min(r.fog_loads))
    assert sum(r.occupancy) == 40


def test_canonical_order_and_msda_has_no_violations():
    cfg = ExperimentConfig(user_counts=(30, 60), seeds=(2, 1), policies=("random", "msda", "nearest"))
    rows = run_experiment(cfg)
    keys = [(r.policy, r.user_count, r.seed) for r in rows]
    assert keys == sorted(keys) and len(keys) == 12
    assert all(r.violations == 0 and r.unmatched == 0 for r in rows if r.policy == "msda")


def test_parallel_run_matches_serial():
    cfg = ExperimentConfig(user_counts=(25, 50), seeds=(0, 1), policies=("msda", "random"))
    serial = render_csv(run_experiment(cfg), cfg.fog_count)
    parallel = render_csv(run_experiment(cfg, jobs=2), cfg.fog_count)
    assert serial == parallel


def test_csv_shape(tmp_path):
    cfg = ExperimentConfig(user_counts=(20,), seeds=(0,), policies=("msda",))
    path = export_csv(run_experiment(cfg), tmp_path / "one.csv", n_fogs=5)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].split(",") == csv_header(5)
    assert lines[0].startswith("policy,seed,user_count,mean_delay_s,median_delay_s,p95_delay_s,delta_p_s,unmatched,violations,runtime_ms,")
    with pytest.raises(ValueError):
        export_csv([], tmp_path / "none.csv")


def test_csv_unwritable(tmp_path):
    cfg = ExperimentConfig(user_counts=(5,), seeds=(0,), policies=("random",))
    with pytest.raises(OSError):
        export_csv(run_experiment(cfg), tmp_path / "missing" / "x.csv")


def test_golden_csv_is_stable():
    cfg = ExperimentConfig.load(DATA / "golden.cfg")
    assert render_csv(run_experiment(cfg), cfg.fog_count) == (DATA / "golden_seed42.csv").read_text()


def test_config_parsing():
    cfg = ExperimentConfig.load(ROOT / "configs" / "reference.cfg")
    assert cfg.user_counts == tuple(range(50, 501, 50))
    assert cfg.seeds == tuple(range(10))
    assert cfg.policies == ("msda", "random")
    assert cfg.capacity_values == (2e9, 4e9, 6e9, 8e9, 10e9)
    assert ExperimentConfig.load(ROOT / "configs" / "queue_dominated.cfg").payload_bits_per_work_unit == 0.01


@pytest.mark.parametrize(
    "body",
    [
        "fog_count = 5\ntypo_key = 1",
        "fog_count = zero",
        "policies = msda, magic",
        "tasks_per_user = 5",
        "gl_criterion = alphabetical",
        "user_counts =",
        "path_loss_exponent = 1",
    ],
)
def test_config_errors(body):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("[experiment]\n" + body + "\n")


def test_config_needs_single_section():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("fog_count = 5\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("[experiment]\n[other]\n")


def test_queue_dominated_config_still_favours_msda():
    cfg = ExperimentConfig.load(ROOT / "configs" / "queue_dominated.cfg")
    rows = run_experiment(cfg, policies=("msda", "random"), seeds=(0, 1, 2))
    by = {}
    for r in rows:
        if r.user_count in (100, 400):
            by.setdefault((r.policy, r.user_count), []).append(r.mean_delay)
    for n in (100, 400):
        assert sum(by[("msda", n)]) < sum(by[("random", n)])
