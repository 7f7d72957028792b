"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigurationError, NumericalFailure

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _sweep(args) -> int:
    from .sweep import load_config, run_sweep

    cfg = load_config(args.config, args.set or (), workers=args.workers, out=args.out, fmt=args.format)
    rows, summary = run_sweep(cfg)
    print(f"wrote {len(rows)} rows to {cfg.path} ({summary['failed_rows']} with errors)")
    for name, dev in sorted(summary["max_oracle_deviation"].items()):
        print(f"max |analytic - oracle| for {name}: {dev:.3e}")
    return EXIT_OK


def _adjudicate(args) -> int:
    from .adjudication import adjudicate_coefficient

    verdict = adjudicate_coefficient()
    for line in verdict.lines():
        print(line)
    return EXIT_OK


def _limits(args) -> int:
    from .checks import run_limit_checks

    results = run_limit_checks()
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name}: worst {r.worst:.3e} (tol {r.tolerance:g})")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointer-decoherence",
        description="Sweeps and checks for the Gaussian-pointer decoherence model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sw = sub.add_parser("sweep", help="run a one-parameter sweep from a config file")
    sw.add_argument("--config", help="INI config file")
    sw.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config value")
    sw.add_argument("--workers", type=int, help="parallel worker processes")
    sw.add_argument("--out", help="output path")
    sw.add_argument("--format", choices=("csv", "json"))
    sw.set_defaults(func=_sweep)
    adj = sub.add_parser("adjudicate-coefficient", help="compare both printed F forms against the grid oracle")
    adj.set_defaults(func=_adjudicate)
    lim = sub.add_parser("limits-check", help="run the limit-recovery suite")
    lim.set_defaults(func=_limits)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
