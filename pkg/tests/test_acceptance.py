"""End-to-end acceptance checks, one test per criterion."""
import time

import numpy as np
import pytest

from colearn.bounds import csper_sum_bound
from colearn.cli import main
from colearn.core import UpdateRule, coactive_update
from colearn.domains import DomainConfig
from colearn.harness import ExperimentConfig, check_log, run_all
from colearn.oracle import run_verification

SEEDS = 10
RULES = ("per", "csper", "pa", "cspa")
PER, CSPER, PA, CSPA = (UpdateRule.parse(r) for r in RULES)


def experiment(domain, rule, rounds, **kw):
    return ExperimentConfig(domain, UpdateRule.parse(rule), rounds=rounds, runs=SEEDS, **kw)


def test_criterion_1_update_rule_exactness(acceptance):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst_pa = worst_cspa = 0.0
    exact = True
    for _ in range(1000):
        d = int(rng.integers(1, 30))
        w = rng.normal(size=d) * rng.uniform(0.01, 100)
        delta = rng.normal(size=d) * rng.uniform(0.01, 100)
        cost = int(rng.integers(1, 20))
        worst_pa = max(worst_pa, abs(coactive_update(w, delta, cost, PA) @ delta - 1.0))
        worst_cspa = max(worst_cspa, abs(coactive_update(w, delta, cost, CSPA) @ delta - cost) / cost)
        exact &= np.array_equal(coactive_update(w, delta, cost, PER), w + 1.0 * delta)
        exact &= np.array_equal(coactive_update(w, delta, cost, CSPER), w + float(cost) * delta)
    elapsed = time.perf_counter() - start
    ok = worst_pa <= 1e-9 and worst_cspa <= 1e-9 and exact and elapsed < 1.0
    acceptance(1, ok, f"PA err {worst_pa:.1e}, CSPA rel err {worst_cspa:.1e}, exact {exact}, {elapsed:.2f}s")
    assert ok


def test_criterion_2_noise_free_bounds(acceptance):
    domains = [
        DomainConfig("path_planning", cube_dim=5, visible_dim=10, kappa=0.1),
        DomainConfig("tsp", points=10, visible_dim=20, kappa=0.1),
    ]
    start = time.perf_counter()
    violations, sum_breaks, runs = 0, 0, 0
    for dc in domains:
        for rule in RULES:
            cfg = experiment(dc, rule, 300, enforce_local_optimality=True)
            for rl in run_all(cfg):
                runs += 1
                violations += not check_log(cfg, rl).all_satisfied
                if rule == "csper":
                    cap = csper_sum_bound(rl.R, rl.w_star_visible_norm, dc.kappa)
                    sum_breaks += int(rl.cum_sq_cost_update.max() > cap + 1e-9)
    elapsed = time.perf_counter() - start
    ok = violations == 0 and sum_breaks == 0 and elapsed < 120
    acceptance(2, ok, f"{runs} runs, {violations} bound violations, {sum_breaks} sum-cap breaks, {elapsed:.1f}s")
    assert ok


def test_criterion_3_noisy_bounds(acceptance):
    domains = [
        DomainConfig("path_planning", cube_dim=5, visible_dim=10, hidden_dim=1),
        DomainConfig("tsp", points=10, visible_dim=20, hidden_dim=1),
    ]
    start = time.perf_counter()
    violations, runs, slack = 0, 0, 0.0
    for dc in domains:
        for rule in ("per", "csper"):
            cfg = experiment(dc, rule, 300, enforce_local_optimality=True)
            for rl in run_all(cfg):
                report = check_log(cfg, rl)
                assert report.noisy
                runs += 1
                violations += not report.all_satisfied
                slack = max(slack, sum(rl.xi))
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 60
    acceptance(3, ok, f"{runs} runs, {violations} violations, max total slack {slack:.2f}, {elapsed:.1f}s")
    assert ok


def test_criterion_4_oracle_certification(acceptance):
    start = time.perf_counter()
    report = run_verification(n_weights=50, seed=0)
    elapsed = time.perf_counter() - start
    counts = ", ".join(f"{d['config']['kind']} {d['certified']}/{d['valid_traces']}/{d['cases']}" for d in report["domains"])
    sizes = {d["config"]["kind"]: d["config"] for d in report["domains"]}
    assert sizes["path_planning"]["cube_dim"] == 4 and sizes["tsp"]["points"] == 6
    ok = report["passed"] and elapsed < 30
    acceptance(4, ok, f"{counts}, {elapsed:.1f}s")
    assert ok


def test_criterion_5_learning_effect(acceptance):
    dc = DomainConfig("tsp", points=20, visible_dim=100, kappa=0.1)
    cfg = experiment(dc, "csper", 500, enforce_local_optimality=True)
    start = time.perf_counter()
    logs = run_all(cfg)
    elapsed = time.perf_counter() - start
    costs = np.array([rl.cost_update for rl in logs], dtype=float)
    first, last = costs[:, :50].mean(), costs[:, -50:].mean()
    nonzero_ok = all(
        np.count_nonzero(rl.cost_update) <= csper_sum_bound(rl.R, rl.w_star_visible_norm, dc.kappa) for rl in logs
    )
    ok = last <= 0.10 * first and nonzero_ok and elapsed < 180
    acceptance(5, ok, f"first-50 mean {first:.3f}, last-50 mean {last:.3f}, ratio {last / first:.3f}, {elapsed:.1f}s")
    assert ok


def test_criterion_6_csper_beats_pa_when_noisy(acceptance):
    dc = DomainConfig("path_planning", cube_dim=7, visible_dim=10, hidden_dim=1)
    finals = {}
    for rule in ("csper", "pa"):
        logs = run_all(experiment(dc, rule, 500))
        finals[rule] = np.array([np.mean(rl.cost_reported) for rl in logs])
    wins = int(np.sum(finals["csper"] <= finals["pa"]))
    ok = wins >= 7
    acceptance(
        6, ok, f"CSPER <= PA in {wins}/10 seeds (means {finals['csper'].mean():.3f} vs {finals['pa'].mean():.3f})"
    )
    assert ok


def test_criterion_7_budgeted_ranking(acceptance):
    dc = DomainConfig("ranking", list_length=20, visible_dim=10)
    start = time.perf_counter()
    finals, top = {}, 0
    for rule in ("per", "csper"):
        logs = run_all(experiment(dc, rule, 1000, budget_range=(5, 15)))
        top = max(top, max(max(rl.cost_reported) for rl in logs))
        finals[rule] = float(np.mean([np.mean(rl.cost_reported) for rl in logs]))
    elapsed = time.perf_counter() - start
    ok = top <= 15 and finals["csper"] <= 2 * finals["per"] and elapsed < 120
    acceptance(
        7, ok, f"max cost {top}, PER {finals['per']:.3f}, CSPER {finals['csper']:.3f}, {elapsed:.1f}s"
    )
    assert ok


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_criterion_8_reproducibility(fmt, tmp_path, acceptance):
    out = tmp_path / "out"
    args = ["run", "--domain", "tsp", "--algo", "cspa", "--rounds", "40", "--runs", "2", "--seed", "9",
            "--enforce", "--format", fmt, "--out", str(out)]
    snapshots = []
    for _ in range(2):
        assert main(args) == 0
        snapshots.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    ok = snapshots[0] == snapshots[1] and len(snapshots[0]) == 3
    acceptance(8, ok, f"{fmt}: {len(snapshots[0])} files byte-identical across reruns")
    assert ok
