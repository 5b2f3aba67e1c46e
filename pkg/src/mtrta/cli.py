"""Command-line front end.

Exit codes: 0 success (``analyze``: every chain schedulable), 1 analysis or
validation verdict negative, 2 unusable input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from . import gen
from .model import SCHEMES, STANDARD, validate
from .rta import METHODS, ConfigError, analyze_system, system_schedulable
from .sim import RANDOMIZED, SYNCHRONOUS, SimConfig, default_horizon, simulate
from .specio import SpecError, dump_system, load_system
from .sweep import load_sweep_spec, rows_to_csv, run_sweep
from .traces import trace_text

OUT_DIR_ENV = "MTRTA_OUT_DIR"

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str, check: bool = True):
    try:
        return load_system(_read(path), check=check)
    except SpecError as exc:
        raise InputError(str(exc)) from None


def _destination(out: Optional[str], default_name: str) -> Optional[Path]:
    """--out wins; otherwise the env directory; otherwise stdout (None)."""
    if out:
        return Path(out)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env) / default_name
    return None


def _emit(text: str, out: Optional[str], default_name: str) -> None:
    dest = _destination(out, default_name)
    if dest is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(text if text.endswith("\n") else text + "\n")


def cmd_validate(args) -> int:
    system = _load(args.spec, check=False)
    problems = validate(system)
    if problems:
        for p in problems:
            print(p)
        return EXIT_NEGATIVE
    print("ok")
    return EXIT_OK


def _table(verdicts) -> str:
    lines = [f"{'chain':<12} {'bound':>10} {'delta':>8} {'iter':>5}  schedulable"]
    for v in verdicts.values():
        bound = "unbounded" if v.bound is None else str(v.bound)
        delta = "-" if v.delta is None else str(v.delta)
        lines.append(f"{v.chain_id:<12} {bound:>10} {delta:>8} {v.iterations:>5}  "
                     f"{'yes' if v.schedulable else 'no'}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    system = _load(args.spec)
    try:
        verdicts = analyze_system(system, args.method)
    except ConfigError as exc:
        raise InputError(str(exc)) from None
    if args.format == "table":
        text = _table(verdicts)
    else:
        text = json.dumps({"method": args.method,
                           "schedulable": system_schedulable(verdicts),
                           "chains": [v.as_dict() for v in verdicts.values()]}, indent=2)
    _emit(text, args.out, "analysis.json")
    return EXIT_OK if system_schedulable(verdicts) else EXIT_NEGATIVE


def cmd_simulate(args) -> int:
    system = _load(args.spec)
    horizon = args.horizon or default_horizon(system)
    try:
        cfg = SimConfig(horizon=horizon, seed=args.seed,
                        release_offsets=RANDOMIZED if args.randomized else SYNCHRONOUS,
                        scheme=args.scheme,
                        supply_alignment="adversarial" if args.adversarial else "early",
                        execution_times="uniform" if args.uniform_exec else "wcet",
                        trace=args.trace is not None)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    result = simulate(system, cfg)
    _emit(json.dumps(result.as_dict(), indent=2), args.out, "simulation.json")
    if args.trace is not None:
        Path(args.trace).write_text(trace_text(result.trace))
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        params = gen.GenParams(chain_count=args.chains, callbacks_per_chain=args.callbacks,
                               total_utilization=Fraction(args.utilization),
                               period_range=(args.min_period, args.max_period),
                               deadline_mode=gen.SCALED if args.deadline_factor else gen.EQUAL_PERIOD,
                               deadline_factor=Fraction(args.deadline_factor or 1),
                               seed=args.seed)
        system = gen.generate_system(params, args.threads, args.scheme or STANDARD)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(dump_system(system), args.out, "system.json")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        spec = load_sweep_spec(_read(args.spec))
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad sweep spec: {exc}") from None
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    rows = run_sweep(spec, workers=args.workers)
    _emit(rows_to_csv(rows), args.out, "sweep.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtrta", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a system description")
    v.add_argument("spec")
    v.set_defaults(func=cmd_validate)

    a = sub.add_parser("analyze", help="response-time bounds per chain")
    a.add_argument("spec")
    a.add_argument("--method", type=str.upper, choices=sorted(METHODS),
                   help="default: executor scheme and the system's deadline class")
    a.add_argument("--format", choices=("json", "table"), default="json")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="discrete-event simulation")
    s.add_argument("spec")
    s.add_argument("--scheme", choices=SCHEMES, help="override every executor's scheme")
    s.add_argument("--horizon", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--randomized", action="store_true", help="random release phases")
    s.add_argument("--adversarial", action="store_true",
                   help="start reservations with their longest blackout")
    s.add_argument("--uniform-exec", action="store_true",
                   help="execution times uniform in [1, wcet]")
    s.add_argument("--trace", help="write the event trace (CSV) here")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("generate", help="random chain set as a system description")
    g.add_argument("--chains", type=int, default=5)
    g.add_argument("--callbacks", type=int, default=10)
    g.add_argument("--utilization", default="1")
    g.add_argument("--threads", type=int, default=4)
    g.add_argument("--scheme", choices=SCHEMES)
    g.add_argument("--min-period", type=int, default=100)
    g.add_argument("--max-period", type=int, default=1000)
    g.add_argument("--deadline-factor", help="D = factor * T (default D = T)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    w = sub.add_parser("sweep", help="schedulability ratios over a parameter range")
    w.add_argument("spec", help="sweep description (JSON)")
    w.add_argument("--seed", type=int)
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
