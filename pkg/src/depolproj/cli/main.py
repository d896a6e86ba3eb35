"""Command-line entry point.

Usage::

    depolproj SUBCOMMAND --config PATH [--seed N] [--out PATH] [--threads N]

Exit codes: 0 success, 1 unexpected internal error, 2 usage error,
3 configuration syntax error, 4 validation error, 5 numerical failure,
6 I/O failure.
"""
from __future__ import annotations

import argparse
import sys

from ..errors import ConfigErrors, DepolprojError, IoError
from .config import KINDS, parse_config
from .runner import THREADS_ENV, default_threads, emit_table, run_experiment

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_NUMERIC = 5
EXIT_IO = 6

_EXIT_BY_CATEGORY = {
    "parse": EXIT_PARSE,
    "validation": EXIT_VALIDATION,
    "numeric": EXIT_NUMERIC,
    "io": EXIT_IO,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depolproj",
        description="Depolarizing-projection experiments that write plot-ready CSV.",
        epilog=f"The default thread count comes from ${THREADS_ENV} (1 when unset).",
    )
    sub = parser.add_subparsers(dest="kind", required=True, metavar="SUBCOMMAND")
    helps = {
        "twirl-entropy": "entropy of the fault-averaged random-circuit state versus L",
        "vqe-sweep": "noisy and mitigated VQE energies over couplings or depths",
        "vqe-descent": "per-iteration energies and overlap of one noisy VQE run",
        "layer-budget": "number of layers for a target accuracy and confidence",
    }
    for kind in KINDS:
        p = sub.add_parser(kind, help=helps[kind])
        p.add_argument("--config", required=True, metavar="PATH", help="experiment configuration file")
        p.add_argument("--seed", type=int, metavar="N", help="master seed (overrides the config)")
        p.add_argument("--out", metavar="PATH", help="output CSV; '-' for stdout (overrides the config)")
        p.add_argument("--threads", type=int, metavar="N", help="worker threads (overrides the environment)")
    return parser


def _fail(code: int, message: str) -> int:
    sys.stderr.write(f"depolproj: {message}\n")
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except (OSError, UnicodeDecodeError) as exc:
            raise IoError(f"cannot read config {args.config}: {exc}") from exc
        cfg = parse_config(text, kind=args.kind).with_overrides(seed=args.seed, out=args.out)
        threads = default_threads() if args.threads is None else args.threads
        if threads < 1:
            return _fail(EXIT_USAGE, f"--threads must be >= 1, got {threads}")
        table = run_experiment(cfg, threads)
        emit_table(table, cfg.out or None)
    except ConfigErrors as exc:
        for err in exc.errors:
            sys.stderr.write(f"depolproj: {err}\n")
        return _EXIT_BY_CATEGORY[exc.category]
    except DepolprojError as exc:
        return _fail(_EXIT_BY_CATEGORY.get(exc.category, EXIT_INTERNAL), str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
