import json

import pytest

from colearn.cli import main
from colearn.harness import CSV_COLUMNS

TINY = {
    "domain": {"kind": "tsp", "points": 8, "visible_dim": 5},
    "rule": "per",
    "rounds": 20,
    "runs": 2,
    "enforce_local_optimality": True,
}


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "tsp.json"
    path.write_text(json.dumps(TINY))
    return path


def test_run_happy_path(config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config), "--algo", "csper", "--seed", "7", "--out", str(out)]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert files == ["tsp_csper.dat", "tsp_csper_run0.csv", "tsp_csper_run1.csv"]
    lines = (out / "tsp_csper_run0.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 21


def test_bad_algo_exits_2(config, capsys):
    with pytest.raises(SystemExit) as e:
        main(["run", "--config", str(config), "--algo", "adagrad"])
    assert e.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_missing_config_exits_1(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 1
    assert "colearn:" in capsys.readouterr().err


def test_reruns_are_byte_identical(config, tmp_path):
    # the JSON echoes the output directory, so both runs write to the same place
    outs = []
    out = tmp_path / "same"
    for _ in range(2):
        assert main(["run", "--config", str(config), "--seed", "3", "--format", "json", "--out", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outs[0] == outs[1] and len(outs[0]) == 3


def test_env_seed_and_flag_precedence(config, tmp_path, monkeypatch):
    def cost_column(out):
        return (out / "tsp_per_run0.csv").read_text()

    monkeypatch.setenv("COLEARN_SEED", "11")
    main(["run", "--config", str(config), "--out", str(tmp_path / "env")])
    main(["run", "--config", str(config), "--seed", "11", "--out", str(tmp_path / "flag")])
    main(["run", "--config", str(config), "--seed", "12", "--out", str(tmp_path / "other")])
    assert cost_column(tmp_path / "env") == cost_column(tmp_path / "flag")
    assert cost_column(tmp_path / "env") != cost_column(tmp_path / "other")


def test_sweep_writes_four_curves(config, tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config), "--runs", "1", "--rounds", "5", "--out", str(out)]) == 0
    dat = sorted(p.name for p in out.glob("*.dat"))
    assert dat == ["tsp_cspa.dat", "tsp_csper.dat", "tsp_pa.dat", "tsp_per.dat"]
    ts = [[l.split()[0] for l in (out / d).read_text().splitlines()] for d in dat]
    assert all(t == ts[0] for t in ts) and len(ts[0]) == 5


def test_noisy_sweep_adds_expert_baseline(config, tmp_path):
    out = tmp_path / "noisy"
    args = ["sweep", "--config", str(config), "--runs", "1", "--rounds", "5", "--noisy", "--out", str(out)]
    assert main(args) == 0
    assert (out / "tsp_expert.dat").exists()


def test_domain_defaults_and_budget(tmp_path):
    out = tmp_path / "rank"
    args = ["run", "--domain", "ranking", "--rounds", "10", "--runs", "1", "--budget", "1:2", "--out", str(out)]
    assert main(args) == 0
    rows = (out / "ranking_per_run0.csv").read_text().splitlines()[1:]
    assert len(rows) == 10 and max(int(r.split(",")[1]) for r in rows) <= 2


def test_bad_budget_exits_2():
    with pytest.raises(SystemExit) as e:
        main(["run", "--domain", "tsp", "--budget", "5:1"])
    assert e.value.code == 2


def test_bounds_subcommand(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bounds", "--R", "1", "--wnorm", "1", "--kappa", "0.1", "--rounds", "100", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,per,csper,pa,cspa"
    t, per, csper, pa, cspa = lines[100].split(",")
    assert int(t) == 100
    assert [float(x) for x in (per, csper, pa, cspa)] == pytest.approx([2.0, 4.0, 40.0, 40.0])


def test_verify_subcommand(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--weights", "3", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"] is True


def test_shipped_configs_load():
    from pathlib import Path

    from colearn.harness import load_config

    paths = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))
    assert len(paths) == 5
    kinds = {load_config(p).domain.kind for p in paths}
    assert kinds == {"path_planning", "tsp", "multi_tsp", "ranking"}
