"""Seeded coactive-learning experiments: the per-round loop plus aggregation and output."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from colearn.bounds import BoundInputs, BoundReport, check_run, compute_xi
from colearn.core import ALL_VARIANTS, UpdateRule, compute_delta, learning_rate
from colearn.domains import RANKING, DomainConfig, draw_true_weights, get_domain
from colearn.errors import ConfigError, DegenerateDeltaError
from colearn.expert import expert_improve, select_feedback

log = logging.getLogger(__name__)

SEED_ENV = "COLEARN_SEED"

CSV_COLUMNS = (
    "t",
    "cost_reported",
    "cost_update",
    "cum_cost_update",
    "avg_cost_update",
    "avg_sq_cost_update",
    "bound_value",
    "bound_satisfied",
    "weight_norm",
    "violation_flag",
)


def default_rounds(kind: str) -> int:
    return 1000 if kind == RANKING else 500


@dataclass(frozen=True)
class ExperimentConfig:
    domain: DomainConfig
    rule: UpdateRule
    rounds: int = 500
    runs: int = 10
    enforce_local_optimality: bool = False
    budget_range: Optional[tuple[int, int]] = None
    master_seed: int = 0
    out: str = "results"
    format: str = "csv"
    strict: bool = False

    def __post_init__(self):
        if self.rounds < 1:
            raise ConfigError("rounds must be positive")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.budget_range is not None:
            lo, hi = self.budget_range
            if not 0 <= lo <= hi:
                raise ConfigError(f"budget range must satisfy 0 <= lo <= hi, got {lo}:{hi}")
            object.__setattr__(self, "budget_range", (int(lo), int(hi)))
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.format!r}")

    @property
    def noisy(self) -> bool:
        return self.domain.noisy

    @property
    def bound_guaranteed(self) -> bool:
        """Whether runs meet every premise of their cost bound, so a violation is a bug.

        Needs enforced local optimality and a kappa-respecting expert (not
        ranking); noisy runs only have bounds for the perceptron rules.
        """
        if not self.enforce_local_optimality or self.domain.kind == RANKING:
            return False
        return not self.noisy or self.rule.name in ("per", "csper")

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.to_dict(),
            "rule": self.rule.name,
            "margin": self.rule.margin,
            "rounds": self.rounds,
            "runs": self.runs,
            "enforce_local_optimality": self.enforce_local_optimality,
            "budget_range": list(self.budget_range) if self.budget_range else None,
            "master_seed": self.master_seed,
            "out": self.out,
            "format": self.format,
            "strict": self.strict,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        try:
            domain = DomainConfig.from_dict(d.pop("domain"))
        except KeyError:
            raise ConfigError("config needs a 'domain' section") from None
        rule = UpdateRule.parse(d.pop("rule", "per"), float(d.pop("margin", 1.0)))
        if "rounds" not in d:
            d["rounds"] = default_rounds(domain.kind)
        br = d.pop("budget_range", None)
        known = {"rounds", "runs", "enforce_local_optimality", "master_seed", "out", "format", "strict"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(domain=domain, rule=rule, budget_range=tuple(br) if br else None, **d)


def load_config(path: "str | Path") -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    cfg = ExperimentConfig.from_dict(doc)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            cfg = replace(cfg, master_seed=int(env))
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return cfg


def run_seed(master_seed: int, run_index: int) -> np.random.SeedSequence:
    """Seed of run ``run_index``: the ``run_index``-th child of ``master_seed``.

    Equivalent to ``SeedSequence(master_seed).spawn(run_index + 1)[-1]``.
    """
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))


@dataclass
class RunLog:
    rule: str
    run_index: int
    master_seed: int
    R: float
    w_star_full: np.ndarray
    w_star_visible_norm: float
    t: list = field(default_factory=list)
    cost_reported: list = field(default_factory=list)
    cost_update: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    weight_norm: list = field(default_factory=list)
    violation_flag: list = field(default_factory=list)
    xi: list = field(default_factory=list)
    margin: list = field(default_factory=list)
    final_weights: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def cum_cost_reported(self) -> np.ndarray:
        return np.cumsum(np.asarray(self.cost_reported, dtype=np.int64))

    @property
    def cum_cost_update(self) -> np.ndarray:
        return np.cumsum(np.asarray(self.cost_update, dtype=np.int64))

    @property
    def cum_sq_cost_update(self) -> np.ndarray:
        return np.cumsum(np.asarray(self.cost_update, dtype=np.int64) ** 2)

    def bound_inputs(self, kappa: float) -> BoundInputs:
        return BoundInputs(self.R, self.w_star_visible_norm, kappa, max(len(self), 1))


def _run_streams(config: ExperimentConfig, run_index: int):
    # children: true weights, instance sequence, expert budgets
    return run_seed(config.master_seed, run_index).spawn(3)


def true_weights(config: ExperimentConfig, run_index: int) -> np.ndarray:
    weight_ss = _run_streams(config, run_index)[0]
    return draw_true_weights(config.domain, np.random.default_rng(weight_ss))


def run_experiment(
    config: ExperimentConfig,
    run_index: int = 0,
    fixed_weights: Optional[np.ndarray] = None,
) -> RunLog:
    """One seeded run of the coactive protocol.

    Each round draws a fresh instance, solves it under the current weights,
    lets the simulated expert improve the result, and applies the update rule
    to the selected feedback.  With ``fixed_weights`` the learner never updates,
    which gives the expert-effort baseline for a given weight vector.
    """
    dcfg = config.domain
    dom = get_domain(dcfg)
    weight_ss, instance_ss, budget_ss = _run_streams(config, run_index)
    w_star = draw_true_weights(dcfg, np.random.default_rng(weight_ss))
    w_star_vis = w_star[: dcfg.visible_dim]
    inst_rng = np.random.default_rng(instance_ss)
    budget_rng = np.random.default_rng(budget_ss)

    learn = fixed_weights is None
    w = np.zeros(dcfg.visible_dim) if learn else np.asarray(fixed_weights, dtype=np.float64).copy()
    rl = RunLog(
        rule=config.rule.name if learn else "fixed",
        run_index=run_index,
        master_seed=config.master_seed,
        R=dom.feature_bound(),
        w_star_full=w_star,
        w_star_visible_norm=float(np.linalg.norm(w_star_vis)),
    )
    kappa = dcfg.kappa
    for t in range(config.rounds):
        inst = dom.generate_instance(inst_rng)
        y = dom.solve(inst, w)
        if config.enforce_local_optimality:
            y = dom.local_search(inst, y, w, 0.0)
        budget = None
        if config.budget_range is not None:
            lo, hi = config.budget_range
            budget = int(budget_rng.integers(lo, hi + 1))
        trace = expert_improve(inst, y, w_star, kappa, budget)
        fb = select_feedback(trace, w, inst)

        lam, xi, margin = 0.0, 0.0, 0.0
        if fb.update_cost > 0:
            delta = compute_delta(dom.feature_map(inst, fb.improved_solution), dom.feature_map(inst, y))
            margin = float(w @ delta)
            xi = compute_xi(delta, fb.update_cost, w_star_vis, kappa)
            if learn:
                try:
                    lam = learning_rate(config.rule, w, delta, fb.update_cost)
                except DegenerateDeltaError:
                    log.warning("round %d: zero feature difference with cost %d, update skipped", t, fb.update_cost)
                else:
                    if lam < 0:
                        log.debug("round %d: negative step %.3g (learner already preferred feedback)", t, lam)
                    w = w + lam * delta
        rl.t.append(t)
        rl.cost_reported.append(fb.reported_cost)
        rl.cost_update.append(fb.update_cost)
        rl.lam.append(lam)
        rl.weight_norm.append(float(np.linalg.norm(w)))
        rl.violation_flag.append(bool(fb.assumption_violated))
        rl.xi.append(xi)
        rl.margin.append(margin)
    rl.final_weights = w
    return rl


def run_baseline(config: ExperimentConfig, run_index: int = 0) -> RunLog:
    """Expert effort when the learner is handed the visible part of the true weights."""
    w_star = true_weights(config, run_index)
    return run_experiment(config, run_index, fixed_weights=w_star[: config.domain.visible_dim])


def _run_one(args):
    config, k = args
    return run_experiment(config, k)


def run_all(config: ExperimentConfig, jobs: int = 1) -> list[RunLog]:
    tasks = [(config, k) for k in range(config.runs)]
    if jobs <= 1:
        return [_run_one(a) for a in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))


def check_log(config: ExperimentConfig, rl: RunLog) -> BoundReport:
    """Bound report for a run, using the noisy bound whenever it exists and applies."""
    noisy = config.noisy and rl.rule in ("per", "csper")
    return check_run(rl, rl.bound_inputs(config.domain.kappa), noisy=noisy)


@dataclass
class CostCurves:
    t: np.ndarray
    avg_reported: np.ndarray
    avg_update: np.ndarray
    expert: Optional[np.ndarray] = None


def _running_mean(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.cumsum(x) / np.arange(1, x.size + 1)


def aggregate_runs(logs: Sequence[RunLog], baseline: Optional[Sequence[RunLog]] = None) -> CostCurves:
    """Mean over runs of each run's average-cost-so-far curve."""
    if not logs:
        raise ValueError("no run logs to aggregate")
    n = len(logs[0])
    if any(len(rl) != n for rl in logs):
        raise ValueError("run logs have different lengths")
    rep = np.mean([_running_mean(rl.cost_reported) for rl in logs], axis=0)
    upd = np.mean([_running_mean(rl.cost_update) for rl in logs], axis=0)
    expert = None
    if baseline:
        if any(len(rl) != n for rl in baseline):
            raise ValueError("baseline logs have different lengths")
        expert = np.mean([_running_mean(rl.cost_reported) for rl in baseline], axis=0)
    return CostCurves(np.arange(n), rep, upd, expert)


def result_records(rl: RunLog, report: Optional[BoundReport]) -> list[dict]:
    cum = rl.cum_cost_update
    avg = _running_mean(rl.cost_update) if len(rl) else np.zeros(0)
    avg_sq = _running_mean(np.asarray(rl.cost_update, dtype=np.float64) ** 2) if len(rl) else np.zeros(0)
    rows = []
    for k in range(len(rl)):
        rows.append(
            {
                "t": int(rl.t[k]),
                "cost_reported": int(rl.cost_reported[k]),
                "cost_update": int(rl.cost_update[k]),
                "cum_cost_update": int(cum[k]),
                "avg_cost_update": float(avg[k]),
                "avg_sq_cost_update": float(avg_sq[k]),
                "bound_value": float(report.bound_value[k]) if report is not None else None,
                "bound_satisfied": bool(report.satisfied[k]) if report is not None else None,
                "weight_norm": float(rl.weight_norm[k]),
                "violation_flag": bool(rl.violation_flag[k]),
            }
        )
    return rows


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_results(
    rl: RunLog,
    report: Optional[BoundReport],
    fmt: str,
    path: "str | Path",
    config: Optional[ExperimentConfig] = None,
) -> Path:
    """Write one run's per-round table as CSV or JSON."""
    path = Path(path)
    rows = result_records(rl, report)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([_csv_cell(r[c]) for c in CSV_COLUMNS])
        text = buf.getvalue()
    elif fmt == "json":
        doc = {
            "config": config.to_dict() if config is not None else None,
            "rule": rl.rule,
            "run_index": rl.run_index,
            "master_seed": rl.master_seed,
            "run_seed": {"entropy": rl.master_seed, "spawn_key": [rl.run_index]},
            "R": rl.R,
            "w_star_visible_norm": rl.w_star_visible_norm,
            "final_weights": [float(x) for x in rl.final_weights] if rl.final_weights is not None else None,
            "columns": list(CSV_COLUMNS),
            "records": rows,
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _write(path, text)
    return path


def emit_plot_data(t: Sequence[int], values: Sequence[float], path: "str | Path") -> Path:
    """Two whitespace-separated columns ``t avg_cost``."""
    lines = [f"{int(a)} {float(b)!r}" for a, b in zip(t, values)]
    _write(Path(path), "\n".join(lines) + ("\n" if lines else ""))
    return Path(path)


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(e.errno, f"cannot write results to {path}: {e.strerror}") from e


def load_results_json(path: "str | Path") -> dict:
    return json.loads(Path(path).read_text())


def sweep_configs(config: ExperimentConfig) -> list[ExperimentConfig]:
    return [replace(config, rule=UpdateRule(v, config.rule.margin)) for v in ALL_VARIANTS]
