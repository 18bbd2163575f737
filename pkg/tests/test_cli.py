import csv
import json

import pytest

from rrl.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_verify_fairness(capsys):
    code, out = run(capsys, "verify", "--check", "fairness", "--n", "4")
    assert code == 0
    report = json.loads(out.out)
    assert report["results"][0]["p_one"] == [1, 2]
    assert report["config"]["seed"] == 0


def test_verify_impossibility_csv(capsys, tmp_path):
    path = tmp_path / "imp.csv"
    code, _ = run(capsys, "verify", "--check", "impossibility", "--n", "4", "--format", "csv", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config:")
    row = next(csv.DictReader(lines[1:]))
    assert row["survivors"] == "0" and row["pass"] == "True"


def test_verify_uniqueness_and_wrong_parity(capsys):
    assert run(capsys, "verify", "--check", "uniqueness", "--n", "3")[0] == 0
    assert run(capsys, "verify", "--check", "uniqueness", "--n", "4")[0] == 2
    assert run(capsys, "verify", "--check", "impossibility", "--n", "5")[0] == 2


def test_best_response_adjacent(capsys):
    code, out = run(capsys, "verify", "--check", "best-response", "--n", "4", "--honest", "adjacent")
    assert code == 0
    assert json.loads(out.out)["results"][0]["max"] == [1, 2]


def test_simulate_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "simulate", "--n", "4", "--seed", "1", "--out", str(a))[0] == 0
    assert run(capsys, "simulate", "--n", "4", "--seed", "1", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    nodes = json.loads(a.read_text())["trace"]["nodes"]
    assert len({n["decision"] for n in nodes}) == 1


def test_config_errors(capsys, tmp_path):
    assert run(capsys, "simulate", "--n", "4", "--ids", "1", "1", "2", "3")[0] == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 4}))
    assert run(capsys, "simulate", "--config", str(cfg))[0] == 2  # seed must be explicit
    cfg.write_text(json.dumps({"n": 4, "seed": 3, "honest": "nonadjacent", "rigger": "case1"}))
    assert run(capsys, "simulate", "--config", str(cfg))[0] == 0
    assert run(capsys, "verify", "--n", "4")[0] == 2
    cfg.write_text("{not json")
    assert run(capsys, "verify", "--config", str(cfg), "--check", "fairness")[0] == 2


def test_capacity_exit(capsys, monkeypatch):
    monkeypatch.setenv("RRL_MAX_UNIVERSE", "10")
    assert run(capsys, "verify", "--check", "fairness", "--n", "4")[0] == 3


def test_monte_carlo_row(capsys):
    code, out = run(
        capsys, "verify", "--check", "monte-carlo", "--n", "4", "--honest", "1", "3",
        "--rigger", "case1", "--samples", "20000", "--seed", "9",
    )
    row = json.loads(out.out)["results"][0]
    assert code == 0 and row["expected"] == [25, 64] and row["seed"] == 9


def test_failing_check_exits_one(capsys, monkeypatch):
    import rrl.cli as cli

    monkeypatch.setattr(cli, "run_fairness", lambda cfg: [cli._row("fairness", False, witness={"x": 1})])
    assert run(capsys, "verify", "--check", "fairness", "--n", "2")[0] == 1


def test_uniformity_and_control_checks(capsys):
    code, out = run(
        capsys, "verify", "--check", "uniformity", "--check", "full-control", "--check", "conditional",
        "--n", "4", "--honest", "adjacent", "--samples", "10",
    )
    assert code == 0
    assert json.loads(out.out)["passed"] is True
