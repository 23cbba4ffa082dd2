#!/usr/bin/env python3
"""
Command-line front end.

    admwex <command> --config job.toml [--mode exact|float] [--out DIR] [--seed N]
                     [--tol T] [--csv] [--log-level LEVEL] [--timings]

Reports go to stdout (or ``--out``/ADMWEX_OUT_DIR); logs go to stderr.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import __version__
from .commands import COMMANDS, cmd_sweep
from .errors import EXIT_CONFIG, EXIT_INTERNAL, AdmwexError
from .jobs import load_job
from .reports import build_report, write_curve, write_report
from .settings import load_settings, parse_log_level

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="admwex",
        description="Admissible weighted extremal Kähler metrics: profiles, stability, "
                    "Einstein–Maxwell searches and orthotoric checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Pipeline to run")
    parser.add_argument("--config", required=True, type=Path, help="TOML job config")
    parser.add_argument("--mode", choices=["exact", "float"], help="Override the arithmetic mode")
    parser.add_argument("--out", type=Path, help="Output directory for the report and CSV curves")
    parser.add_argument("--seed", type=int, help="Override the random seed")
    parser.add_argument("--tol", type=float, help="Override the tolerance")
    parser.add_argument("--csv", action="store_true", help="Also write CSV curves")
    parser.add_argument("--log-level", help="Logging level (default: ADMWEX_LOG_LEVEL or INFO)")
    parser.add_argument("--timings", action="store_true", help="Record runtimes in the report")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        settings = load_settings()
        logging.basicConfig(
            level=parse_log_level(args.log_level) if args.log_level else settings.log_level,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            stream=sys.stderr,
        )

        job = load_job(args.config).with_overrides(mode=args.mode, seed=args.seed, tolerance=args.tol)
        started = time.perf_counter()
        if args.command == "sweep":
            result = cmd_sweep(job, settings)
        else:
            result = COMMANDS[args.command](job)
        elapsed = time.perf_counter() - started if args.timings else None

        report = build_report(result.command, job, result.payload, elapsed)
        out_dir = args.out or settings.out_dir
        write_report(report, out_dir)
        if args.csv:
            for name, curve in result.curves.items():
                write_curve(report, name, curve.header, curve.rows, out_dir or Path("."))
        if result.exit_code:
            logger.info(f"{args.command} finished with exit code {result.exit_code}")
        return result.exit_code
    except AdmwexError as e:
        logger.error(f"❌ {type(e).__name__}: {str(e)}")
        return e.exit_code
    except ValueError as e:
        logger.error(f"❌ Invalid input: {str(e)}")
        return EXIT_CONFIG
    except Exception as e:
        logger.error(f"❌ Unexpected error: {str(e)}", exc_info=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
