"""Command-line front end.

    kaonkraus correlate --preset kaon-like --observables "S@p S@q" --ta-range 0:10:21 --tb-range 0:10:21
    kaonkraus probabilities --params my.json --mode identical --out probs.csv
    kaonkraus validate --preset kaon-like

Exit codes: 0 success, 1 a validation check failed, 2 bad configuration,
3 decoherence rate above the complete-positivity bound.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .checks import run_all
from .errors import BoundViolationError, LayoutError, ParameterError
from .observables import Mode
from .params import PRESETS, PhysicalParams, load_params
from .sweep import (
    CORRELATION_HEADER,
    PROBABILITY_HEADER,
    SweepConfig,
    correlation_rows,
    parse_pair,
    parse_range,
    probability_rows,
    to_csv,
)

EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_BOUND = 3


class ConfigError(Exception):
    pass


def _add_source(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--preset", choices=sorted(PRESETS), help="named parameter preset (default kaon-like)")
    group.add_argument("--params", metavar="FILE", help="JSON parameter file")


def _add_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.DISTINGUISHABLE.value)
    parser.add_argument("--ta-range", default="0:10:11", metavar="LO:HI:N", help="Alice lab times")
    parser.add_argument("--tb-range", default="0:10:11", metavar="LO:HI:N", help="Bob lab times")
    parser.add_argument("--p-mom", type=float, default=0.0, metavar="X", help="|p| (units of the rest mass's unit)")
    parser.add_argument("--q-mom", type=float, default=None, metavar="X", help="|q| (default: same as |p|)")
    parser.add_argument("--out", metavar="FILE", help="CSV output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kaonkraus", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    corr = sub.add_parser("correlate", help="correlation functions on a time grid")
    _add_source(corr)
    corr.add_argument("--observables", default="S@p S@q", help="'S@p S@q', 'D+@p D+@q', 'D+@p D-@q', ...")
    _add_grid(corr)

    prob = sub.add_parser("probabilities", help="flavor joint probabilities on a time grid")
    _add_source(prob)
    _add_grid(prob)

    val = sub.add_parser("validate", help="run the invariant suites")
    _add_source(val)
    val.add_argument("--tau-max", type=float, default=None, help="largest proper time checked (default 20/gamma_l)")
    return parser


def resolve_params(args: argparse.Namespace) -> tuple[PhysicalParams, float]:
    try:
        if args.params:
            return load_params(args.params)
        preset = PRESETS[args.preset or "kaon-like"]
        return preset.params, preset.rest_mass
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def sweep_config(args: argparse.Namespace, with_observables: bool) -> SweepConfig:
    params, rest_mass = resolve_params(args)
    try:
        kwargs = {}
        if with_observables:
            kwargs["observables"] = parse_pair(args.observables)
        p_mom = args.p_mom
        q_mom = p_mom if args.q_mom is None else args.q_mom
        if p_mom < 0 or q_mom < 0:
            raise ValueError("momentum magnitudes must be nonnegative")
        return SweepConfig(
            params=params,
            rest_mass=rest_mass,
            t_a=parse_range(args.ta_range),
            t_b=parse_range(args.tb_range),
            mode=Mode(args.mode),
            p_mom=p_mom,
            q_mom=q_mom,
            **kwargs,
        )
    except (ValueError, LayoutError) as exc:
        raise ConfigError(str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _run_sweep(args: argparse.Namespace, correlate: bool) -> int:
    cfg = sweep_config(args, with_observables=correlate)
    report = cfg.bound_check()
    if report is not None and not report.passed:
        print(f"error: {report.describe()}", file=sys.stderr)
        return EXIT_BOUND
    if correlate:
        text = to_csv(CORRELATION_HEADER, correlation_rows(cfg))
    else:
        text = to_csv(PROBABILITY_HEADER, probability_rows(cfg))
    _emit(text, args.out)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    params, rest_mass = resolve_params(args)
    if args.tau_max is not None and not args.tau_max > 0:
        raise ConfigError("--tau-max must be positive")
    results = run_all(params, tau_max=args.tau_max, rest_mass=rest_mass)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "validation FAILED")
    return 0 if ok else EXIT_FAILED


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        return _run_sweep(args, correlate=args.command == "correlate")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BoundViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND


if __name__ == "__main__":
    sys.exit(main())
