"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 physicality error,
4 numerical-invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import scenarios
from .config import SweepConfig, evaluate, from_dict, load_config, serialize_config
from .errors import (
    ConfigError,
    InvariantViolation,
    LossyNetError,
    PhotonCapError,
    PhysicalityError,
)
from .network import DEFAULT_CAP, NOON, SINGLE

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICALITY, EXIT_INVARIANT = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lossynet",
        description="Few-photon simulator for networks of lossy beam splitters.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="scenario JSON file")
        p.add_argument("--photons", type=int, help="override input photon number")
        p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="photon-number cap")
        p.add_argument("--tolerance", type=float, default=scenarios.DEFAULT_TOLERANCE,
                       help="allowed completeness residual")

    p = sub.add_parser("validate", help="check a config and build its network")
    common(p)

    p = sub.add_parser("run", help="evaluate a config (its sweep, if any) to CSV")
    common(p)
    p.add_argument("--out", help="CSV path (default: config 'output' or stdout)")

    p = sub.add_parser("sweep", help="run with the sweep block overridden")
    common(p)
    p.add_argument("--out")
    p.add_argument("--param", action="append",
                   help="parameter to sweep (repeat to tie several together)")
    p.add_argument("--start", default=None)
    p.add_argument("--stop", default=None)
    p.add_argument("--steps", type=int, default=None)

    p = sub.add_parser("cpa-find", help="search the sweep parameter for CPA or transparency")
    common(p)
    p.add_argument("--objective", choices=["absorption", "transparency"],
                   default="absorption")

    p = sub.add_parser("scenario", help="print a canned config as JSON")
    p.add_argument("name", choices=["single-bs", "interferometer"])
    p.add_argument("--photons", type=int, default=1)
    p.add_argument("--out")
    return parser


def _with_photons(cfg, photons):
    if photons is None:
        return cfg
    inp = cfg.input
    kind = inp.kind
    if photons >= 2 and kind == SINGLE:
        kind = NOON
    elif photons >= 2 and kind != NOON:
        raise ConfigError(f"--photons {photons} is not supported for {kind!r} inputs")
    elif photons == 1 and kind == NOON:
        kind = SINGLE
    return cfg.replace(input=dataclasses.replace(inp, kind=kind, photons=photons))


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_table(cfg, args) -> int:
    table = scenarios.run(cfg, cap=args.cap)
    _write(table.to_csv(), args.out or cfg.output)
    if table.max_residual > args.tolerance:
        print(f"error: completeness residual {table.max_residual:.3g} exceeds "
              f"{args.tolerance:.3g}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.verb == "scenario":
            if args.name == "single-bs":
                cfg = scenarios.scenario_single_bs()
                cfg = _with_photons(cfg, args.photons if args.photons != 1 else None)
            else:
                cfg = scenarios.scenario_interferometer(photons=args.photons)
            _write(serialize_config(cfg), args.out)
            return EXIT_OK

        cfg = _with_photons(load_config(args.config), args.photons)
        if args.verb == "validate":
            net, state = scenarios.build(cfg, cap=args.cap)
            photons = max(state.photon_numbers(), default=0)
            if photons > args.cap:
                raise PhotonCapError(f"input has {photons} photons, cap is {args.cap}")
            print(f"ok: {len(net.stages)} stages, {len(net.registry)} modes "
                  f"({len(net.registry.environment_modes)} environment)")
            return EXIT_OK
        if args.verb == "run":
            return _run_table(cfg, args)
        if args.verb == "sweep":
            base = cfg.sweep
            if base is None and not (args.param and args.start and args.stop and args.steps):
                raise ConfigError("sweep needs a sweep block or --param/--start/--stop/--steps")
            param = tuple(args.param) if args.param else base.parameter
            if isinstance(param, tuple) and len(param) == 1:
                param = param[0]
            sweep = SweepConfig(
                param,
                args.start if args.start is not None else base.start,
                args.stop if args.stop is not None else base.stop,
                args.steps if args.steps is not None else base.steps,
                base.endpoint if base is not None else False,
            )
            for bound in (sweep.start, sweep.stop):
                evaluate(bound)
            cfg = from_dict(cfg.replace(sweep=sweep).to_dict())
            return _run_table(cfg, args)
        if args.verb == "cpa-find":
            objective = (scenarios.TOTAL_ABSORPTION if args.objective == "absorption"
                         else scenarios.TOTAL_TRANSPARENCY)
            res = scenarios.cpa_find(cfg, objective, cap=args.cap)
            print(f"parameter={res.parameter} phase={res.phase:.12g} value={res.value:.12g}")
            return EXIT_OK
    except PhysicalityError as exc:
        print(f"physicality error: {exc}", file=sys.stderr)
        return EXIT_PHYSICALITY
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, LossyNetError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
