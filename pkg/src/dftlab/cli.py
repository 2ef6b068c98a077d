"""Command line front door.

    dftlab run --config run.json [--output DIR] [--seed U64] [--threads N]
    dftlab report DIR_OR_MANIFEST
    dftlab validate --config run.json
    dftlab oracle --law rademacher --t 1.0 --n 8 [--threshold X]

Exit codes: 0 success, 2 config error, 3 integrity error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

from . import __version__
from ._backend import set_threads
from .config import ConfigError, load_config
from .oracle import DiscreteLaw, exact_prefix_max_distribution
from .rng import MASK64
from .runner import IntegrityError, report_lines, resolve_output, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRITY = 3

log = logging.getLogger("dftlab")


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v <= MASK64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _t_value(s: str) -> float:
    v = float(s)
    if not -math.pi <= v < math.pi:
        raise argparse.ArgumentTypeError("t must lie in [-pi, pi)")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dftlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"dftlab {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log suite progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the configured suites")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--output", default=None, help="output directory (overrides config and $DFTLAB_OUTPUT_DIR)")
    p_run.add_argument("--seed", type=_u64, default=None, help="override master_seed")
    p_run.add_argument("--threads", type=_positive, default=None, help="worker threads; never changes results")

    p_rep = sub.add_parser("report", help="verify a manifest and print verdicts")
    p_rep.add_argument("manifest", help="manifest.json or the run directory holding it")

    p_val = sub.add_parser("validate", help="check a config file without running it")
    p_val.add_argument("--config", required=True)

    p_or = sub.add_parser("oracle", help="exact prefix-maximum law for a small discrete case")
    p_or.add_argument("--law", choices=("rademacher", "point"), default="rademacher")
    p_or.add_argument("--value", type=float, default=0.0, help="atom location for --law point")
    p_or.add_argument("--t", type=_t_value, required=True)
    p_or.add_argument("--n", type=_positive, required=True)
    p_or.add_argument("--threshold", type=float, default=None,
                      help="print P(max > threshold) instead of the full law")
    return ap


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(master_seed=args.seed)
    threads = set_threads(args.threads) if args.threads else None
    manifest = run(cfg, output=args.output, threads=threads)
    out = resolve_output(cfg, args.output)
    print(f"wrote {len(manifest.files)} file(s) and manifest.json to {out}")
    return EXIT_OK


def _cmd_report(args) -> int:
    for line in report_lines(args.manifest):
        print(line)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"ok: {cfg.distribution.label}, suites={list(cfg.suites) or 'none'}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    law = DiscreteLaw.rademacher() if args.law == "rademacher" else DiscreteLaw.point(args.value)
    try:
        dist = exact_prefix_max_distribution(law, args.t, args.n)
    except ValueError as exc:
        raise ConfigError("n", str(exc)) from None
    if args.threshold is not None:
        print(format(math.fsum(m for v, m in dist if v > args.threshold), ".17g"))
        return EXIT_OK
    print("value,probability")
    for v, m in dist:
        print(f"{v:.17g},{m:.17g}")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "report": _cmd_report, "validate": _cmd_validate, "oracle": _cmd_oracle}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        # a missing config is a config problem; a missing artifact is caught below
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
