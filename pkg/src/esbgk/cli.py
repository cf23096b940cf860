"""Command line entry point: ``esbgk run --scenario NAME [options]``."""

import argparse
import logging
import sys

from .config import COMPARE, SCENARIOS, parse_config
from .errors import ConfigError, ESBGKError
from .solver import run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser():
    parser = argparse.ArgumentParser(prog="esbgk", description="AP IMEX solver for the ES-BGK equation")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a scenario")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--eps", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--nx", help="cells per axis, N or N,N")
    p.add_argument("--nv", type=int)
    p.add_argument("--vmax", type=float)
    p.add_argument("--cfl", type=float)
    p.add_argument("--tend", type=float)
    p.add_argument("--out", default=None)
    p.add_argument("--compare", choices=COMPARE)
    p.add_argument("--config", help="flat key=value file")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, matching the config-error code
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in ("scenario", "eps", "nu", "nx", "nv", "vmax", "cfl", "out", "compare")}
    overrides["t_end"] = args.tend
    try:
        cfg = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.out is None:
        cfg.out = "out"
    try:
        result = run(cfg)
    except ESBGKError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"{cfg.scenario}: {result.steps} steps to t={result.t:.6g}, output in {cfg.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
