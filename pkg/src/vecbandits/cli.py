"""Command-line entry points.

Subcommands:
    run <config.json>                 execute an experiment, write CSV
    oracle <trace-file> --p P [--budget B]
    record <env-spec.json> --out <trace-file>
    verify-potentials [--samples N]

Exit codes: 0 success, 1 bound-check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import InvalidConfigError, InvalidInputError, TraceParseError
from .harness import (
    ExperimentConfig,
    build_environment,
    run_experiment,
    verify_composite_facts,
    verify_potential_facts,
)
from .environment import read_trace, record_trace
from .oracle import opt_bwk, opt_olvc_adversarial
from .potential import INFINITY


def _parse_p_flag(raw: str) -> float:
    if raw.lower() in ("inf", "infinity"):
        return INFINITY
    try:
        return float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad norm exponent {raw!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vecbandits",
        description="Simulation harness for vector-cost online learning and budgeted bandits",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the config's seed list")
    parser.add_argument("--out-dir", default=None, help="directory for output files")
    parser.add_argument("--format", default="csv", choices=["csv"], help="report format")
    parser.add_argument("--jobs", type=int, default=1, help="parallel runs")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="JSON experiment config")

    p_oracle = sub.add_parser("oracle", help="solve the offline benchmark for a trace file")
    p_oracle.add_argument("trace", help="trace file")
    p_oracle.add_argument("--p", type=_parse_p_flag, required=True)
    p_oracle.add_argument("--budget", type=float, default=None)

    p_record = sub.add_parser("record", help="record an environment to a trace file")
    p_record.add_argument("env_spec", help="JSON environment spec with kind/T/p fields")
    p_record.add_argument("--out", required=True)

    p_verify = sub.add_parser("verify-potentials", help="run the potential property sweep")
    p_verify.add_argument("--samples", type=int, default=10000)
    return parser


def _cmd_run(args) -> int:
    path = Path(args.config)
    if not path.exists():
        print(f"error: config file {path} not found", file=sys.stderr)
        return 2
    try:
        config = ExperimentConfig.from_file(path)
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config.seeds = [args.seed]
    if args.out_dir is not None:
        name = config.out or f"{config.experiment}.csv"
        config.out = str(Path(args.out_dir) / Path(name).name)
    report = run_experiment(config, jobs=max(1, args.jobs))
    if config.out:
        print(f"wrote {config.out}")
    for variant, agg in report.aggregates.items():
        status = "ok" if agg.get("bound_ok", True) else "BOUND FAILED"
        ratio = agg.get("mean_ratio")
        ratio_txt = f" ratio={ratio:.4f}" if ratio is not None else ""
        print(f"{variant}: alg={agg['mean_alg']:.6g} opt={agg['mean_opt']:.6g}{ratio_txt} [{status}]")
    return 0 if report.all_bounds_ok else 1


def _cmd_oracle(args) -> int:
    try:
        steps, d, n = read_trace(args.trace)
    except FileNotFoundError:
        print(f"error: trace file {args.trace} not found", file=sys.stderr)
        return 2
    except TraceParseError as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return 2
    costs = np.stack([s.costs for s in steps])
    if args.budget is not None:
        if steps[0].rewards is None:
            print("error: budgeted oracle needs a trace with rewards", file=sys.stderr)
            return 2
        rewards = np.stack([s.rewards for s in steps])
        sol = opt_bwk((costs, rewards), args.p, args.budget)
        print(f"tau_star = {sol.tau_star}")
    else:
        sol = opt_olvc_adversarial(costs, args.p)
    x_txt = ", ".join(f"{v:.6g}" for v in sol.x_star)
    print(f"x_star = ({x_txt})")
    print(f"OPT = {sol.value:.17g}")
    print(f"method = {sol.method}  certified_gap = {sol.certified_gap:.3g}")
    return 0


def _cmd_record(args) -> int:
    import json

    path = Path(args.env_spec)
    if not path.exists():
        print(f"error: env spec {path} not found", file=sys.stderr)
        return 2
    try:
        raw = json.load(open(path))
        T = int(raw.pop("T"))
        p = raw.pop("p", 2)
        if isinstance(p, str):
            p = _parse_p_flag(p)
        seed = int(raw.pop("seed", 0))
        env = build_environment(raw, T, p, seed)
    except (KeyError, InvalidConfigError, InvalidInputError, json.JSONDecodeError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return 2
    record_trace(env, T, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_verify(args) -> int:
    checks = verify_potential_facts(samples=args.samples)
    checks += verify_composite_facts(samples=max(200, args.samples // 5))
    ok = True
    for check in checks:
        print(check.line())
        ok = ok and check.ok
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    handlers = {
        "run": _cmd_run,
        "oracle": _cmd_oracle,
        "record": _cmd_record,
        "verify-potentials": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (InvalidConfigError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
