"""Command line entry point: ``colearn {run,sweep,verify,bounds}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from colearn.bounds import BoundInputs, theorem1_bound
from colearn.core import ALL_VARIANTS, UpdateRule
from colearn.domains import KINDS, MULTI_TSP, PATH_PLANNING, RANKING, TSP, DomainConfig, normalize_kind
from colearn.errors import ColearnError
from colearn.harness import (
    SEED_ENV,
    ExperimentConfig,
    aggregate_runs,
    check_log,
    default_rounds,
    emit_plot_data,
    emit_results,
    load_config,
    run_all,
    run_baseline,
    sweep_configs,
)
from colearn.oracle import run_verification

log = logging.getLogger("colearn")

# experiment sizes used for each domain when no config file is given
DOMAIN_DEFAULTS = {
    PATH_PLANNING: {"cube_dim": 7, "visible_dim": 10},
    TSP: {"points": 20, "visible_dim": 100},
    MULTI_TSP: {"points": 40, "salespersons": 4, "visible_dim": 10},
    RANKING: {"list_length": 20, "visible_dim": 10},
}
NOISY_HIDDEN_DIM = {PATH_PLANNING: 1, TSP: 10, MULTI_TSP: 1, RANKING: 1}


class BoundViolation(ColearnError):
    pass


def _budget(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"budget must look like LO:HI, got {text!r}") from None
    if not 0 <= lo <= hi:
        raise argparse.ArgumentTypeError(f"budget needs 0 <= LO <= HI, got {text!r}")
    return lo, hi


def _kind(text: str) -> str:
    try:
        return normalize_kind(text)
    except ColearnError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="colearn", description="Coactive learning experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def experiment_flags(sp, with_algo: bool):
        sp.add_argument("--config", type=Path, help="experiment JSON file")
        sp.add_argument("--domain", type=_kind, help=f"domain kind when no config is given ({', '.join(KINDS)})")
        if with_algo:
            sp.add_argument("--algo", choices=[v.value for v in ALL_VARIANTS])
        sp.add_argument("--seed", type=int, help=f"master seed (overrides {SEED_ENV} and the config)")
        sp.add_argument("--rounds", type=int)
        sp.add_argument("--runs", type=int)
        sp.add_argument("--out", type=Path)
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--enforce", action="store_true", default=None, help="make solver output locally optimal")
        sp.add_argument("--budget", type=_budget, metavar="LO:HI", help="per-round expert budget range")
        sp.add_argument("--noisy", action="store_true", help="hide features from the learner")
        sp.add_argument("--strict", action="store_true", default=None, help="exit 1 on any guaranteed-bound violation")
        sp.add_argument("--jobs", type=int, default=1, help="runs executed in parallel")

    experiment_flags(sub.add_parser("run", help="run one update rule"), with_algo=True)
    experiment_flags(sub.add_parser("sweep", help="run all four update rules"), with_algo=False)

    v = sub.add_parser("verify", help="brute-force certification on small instances")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--weights", type=int, default=50, help="random weight vectors per domain")
    v.add_argument("--out", type=Path, help="write the JSON report here (default: stdout)")

    b = sub.add_parser("bounds", help="tabulate the noise-free bounds over a horizon")
    b.add_argument("--R", type=float, required=True)
    b.add_argument("--wnorm", type=float, required=True, help="norm of the true weights")
    b.add_argument("--kappa", type=float, default=0.1)
    b.add_argument("--rounds", type=int, default=500)
    b.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    return p


def resolve_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    elif args.domain is not None:
        dcfg = DomainConfig(args.domain, **DOMAIN_DEFAULTS[args.domain])
        cfg = ExperimentConfig(dcfg, UpdateRule.parse("per"), rounds=default_rounds(args.domain))
        env = os.environ.get(SEED_ENV)
        if env is not None:
            cfg = replace(cfg, master_seed=int(env))
    else:
        raise ColearnError("either --config or --domain is required")
    if getattr(args, "algo", None):
        cfg = replace(cfg, rule=UpdateRule.parse(args.algo, cfg.rule.margin))
    updates = {}
    for flag, key in [("seed", "master_seed"), ("rounds", "rounds"), ("runs", "runs"), ("format", "format"),
                      ("enforce", "enforce_local_optimality"), ("budget", "budget_range"), ("strict", "strict")]:
        val = getattr(args, flag)
        if val is not None:
            updates[key] = val
    if args.out is not None:
        updates["out"] = str(args.out)
    if args.noisy and not cfg.domain.noisy:
        updates["domain"] = replace(cfg.domain, hidden_dim=NOISY_HIDDEN_DIM[cfg.domain.kind])
    return replace(cfg, **updates)


def execute(cfg: ExperimentConfig, jobs: int = 1, baseline: bool = False) -> list[Path]:
    out = Path(cfg.out)
    stem = f"{cfg.domain.kind}_{cfg.rule.name}"
    logs = run_all(cfg, jobs=jobs)
    written = []
    violations = []
    for rl in logs:
        report = check_log(cfg, rl)
        if cfg.bound_guaranteed and not report.all_satisfied:
            violations.append((rl.run_index, report.first_violation()))
        written.append(emit_results(rl, report, cfg.format, out / f"{stem}_run{rl.run_index}.{cfg.format}", cfg))
    curves = aggregate_runs(logs)
    written.append(emit_plot_data(curves.t, curves.avg_reported, out / f"{stem}.dat"))
    if baseline:
        base = [run_baseline(cfg, k) for k in range(cfg.runs)]
        curves = aggregate_runs(logs, base)
        written.append(emit_plot_data(curves.t, curves.expert, out / f"{cfg.domain.kind}_expert.dat"))
    if violations and cfg.strict:
        run, t = violations[0]
        raise BoundViolation(f"{cfg.rule.name}: cost bound violated in run {run} at round {t}")
    for run, t in violations:
        log.warning("%s: cost bound violated in run %d at round %d", cfg.rule.name, run, t)
    return written


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    for p in execute(cfg, args.jobs):
        log.info("wrote %s", p)
    return 0


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    with_baseline = cfg.noisy or not cfg.enforce_local_optimality
    for i, c in enumerate(sweep_configs(cfg)):
        for p in execute(c, args.jobs, baseline=with_baseline and i == 0):
            log.info("wrote %s", p)
    return 0


def cmd_verify(args) -> int:
    report = run_verification(n_weights=args.weights, seed=args.seed)
    text = json.dumps(report, indent=1) + "\n"
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    if not report["passed"]:
        print("colearn: verification failed", file=sys.stderr)
        return 1
    return 0


def cmd_bounds(args) -> int:
    lines = ["t," + ",".join(v.value for v in ALL_VARIANTS)]
    for T in range(1, args.rounds + 1):
        inp = BoundInputs(args.R, args.wnorm, args.kappa, T)
        lines.append(f"{T}," + ",".join(repr(theorem1_bound(v, inp)) for v in ALL_VARIANTS))
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "verify": cmd_verify, "bounds": cmd_bounds}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ColearnError, OSError, ValueError) as e:
        print(f"colearn: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
