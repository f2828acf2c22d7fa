"""Command line entry point.

    beamadhesion run --config cfg.json [--out DIR]
    beamadhesion experiment {adhesion,longtime,linearize,regularize,examples} --config cfg.json [--out DIR]

The output directory defaults to ``$BEAMADHESION_OUT`` or ``./out``.
Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .dynamics import DissipationViolation, NumericalFailure, StabilityError
from .experiments import EXPERIMENTS, experiment, run

OUT_ENV = "BEAMADHESION_OUT"

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or "out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamadhesion", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="simulate one configuration")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out")
    p_exp = sub.add_parser("experiment", help="run a verification harness")
    p_exp.add_argument("name", choices=EXPERIMENTS)
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = _out_dir(args.out)
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            result = run(cfg, out)
            print(f"wrote {out}/summary.json (drift {result['drift']:.3e})")
        else:
            experiment(args.name, cfg, out)
            print(f"wrote {out}/report.json")
    except (ConfigError, StabilityError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalFailure, DissipationViolation) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
