import json
from pathlib import Path

from fogmatch.cli import main

ROOT = Path(__file__).parent.parent
GOLDEN = Path(__file__).parent / "data" / "golden.cfg"


def test_run_writes_csv_and_traces(tmp_path, capsys):
    out = tmp_path / "res.csv"
    code = main(["run", "--config", str(GOLDEN), "--out", str(out), "--policy", "msda", "--trace-stages"])
    assert code == 0
    assert len(out.read_text().splitlines()) == 3
    stages = [json.loads(line) for line in (tmp_path / "res.stages.jsonl").read_text().splitlines()]
    assert stages and all(s["policy"] == "msda" for s in stages)
    assert "wrote 2 rows" in capsys.readouterr().out


def test_seed_filter_and_timing(tmp_path):
    out = tmp_path / "res.csv"
    assert main(["run", "--config", str(GOLDEN), "--out", str(out), "--seed", "7", "--policy", "random", "--timing"]) == 0
    rows = out.read_text().splitlines()[1:]
    assert all(r.split(",")[1] == "7" and r.split(",")[9] != "" for r in rows)


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[experiment]\nnot_a_key = 1\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "x.csv")]) == 1


def test_infeasible_exit_code(tmp_path):
    cfg = tmp_path / "inf.cfg"
    cfg.write_text("[experiment]\nuser_counts = 10\nseeds = 0\nquota_policy = fixed\nq_min_fixed = 3\nq_max_fixed = 4\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == 2


def test_io_error_exit_code(tmp_path):
    assert main(["run", "--config", str(GOLDEN), "--out", str(tmp_path / "no" / "dir.csv")]) == 3


def test_demo_counterexample(capsys):
    assert main(["demo-counterexample"]) == 0
    out = capsys.readouterr().out
    assert "mu(f1) = {u1, u2}" in out and "below q_min: fogs [2]" in out
    assert "mu(f3) = {u3}" in out and "audit: OK" in out


def test_verify(tmp_path, capsys):
    cfg = tmp_path / "v.cfg"
    cfg.write_text("[experiment]\nverify_instances = 20\nseeds = 3\n")
    assert main(["verify", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.count("[PASS]") == 4
