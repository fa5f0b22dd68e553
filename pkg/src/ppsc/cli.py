"""Command-line entry point: ``python3 -m ppsc``."""

from __future__ import annotations

import argparse
import sys

from .experiments import METHODS, SAMPLING_METHODS, ConfigError, RunConfig, run
from .instance import CoverageModel

EXIT_OK = 0
EXIT_CONFIG = 2


def _generator(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected v,bbar,eps,seed")
    try:
        return int(parts[0]), float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad generator parameters {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ppsc", description="Solve probabilistic partial set covering instances.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", metavar="PATH", help="instance JSON file")
    src.add_argument("--generate", metavar="v,bbar,eps,seed", type=_generator,
                     help="generate a benchmark instance with v nodes")
    p.add_argument("--model", choices=[m.value for m in CoverageModel],
                   default=CoverageModel.INDEPENDENT.value, help="coverage model for --generate")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--kappa", type=int, choices=(1, 2), default=2)
    p.add_argument("--omega", type=int, default=50, metavar="K", help="scenarios per replication")
    p.add_argument("--reps", type=int, default=1, metavar="M", help="scenario replications")
    p.add_argument("--scenario-seed", type=int, default=0, metavar="S",
                   help="replication r uses seed S + r")
    p.add_argument("--time-limit", type=float, default=None, metavar="SECS")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--save-scenarios", metavar="PATH")
    p.add_argument("--load-scenarios", metavar="PATH")
    p.add_argument("--out", metavar="PATH", help="CSV output (default: stdout)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(
        method=args.method, instance_path=args.instance, generate=args.generate,
        model=args.model, kappa=args.kappa, omega=args.omega, reps=args.reps,
        scenario_seed=args.scenario_seed, time_limit=args.time_limit,
        node_limit=args.node_limit, save_scenarios=args.save_scenarios,
        load_scenarios=args.load_scenarios, out=args.out,
    )
    try:
        result = run(config)
        text = result.to_csv()
        if config.out:
            with open(config.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except ConfigError as exc:
        print(f"ppsc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ppsc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for rep in result.reports:
        print(rep.summary(), file=sys.stderr)
    if result.gap is not None and config.method in SAMPLING_METHODS:
        g = result.gap
        print(f"gap: lb={g.lb:g} ub={g.ub:g} egap%={g.label} confidence={g.confidence:.3f}",
              file=sys.stderr)
    return EXIT_OK
