"""
maslov_main.py — ConformalMaslov Command-Line Entry Point
=========================================================

Maslov indices of Lagrangian paths transported by conformally symplectic
flows: running indices, asymptotic rates, graph scans, twist certificates
and a self-test of the library's invariants.

Run with: python maslov_main.py <subcommand> [config.json] [options]

Exit codes: 0 ok, 1 invariant failure, 2 configuration error, 3 numerical error.
"""

import argparse
import logging
import sys

from config import (
    APP_NAME,
    APP_VERSION,
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_ERROR,
    LOG_FILE,
    LOG_LEVEL,
)
from utils.errors import ConfigError, MaslovError
from utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

CONFIG_COMMANDS = ("index", "asymptotic", "scan", "twist")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-parser per subcommand."""
    parser = argparse.ArgumentParser(
        prog="maslov",
        description=f"{APP_NAME} {APP_VERSION}: Maslov indices of conformally symplectic flows",
    )
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    parser.add_argument(
        "--log-level",
        default=LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Logging level (default: %(default)s)",
    )
    parser.add_argument("--log-file", default=LOG_FILE, help="Log file (empty to disable)")
    sub = parser.add_subparsers(dest="command", required=True)

    helps = {
        "index": "running Maslov index of a flow-generated path (CSV)",
        "asymptotic": "asymptotic Maslov index at a point (JSON)",
        "scan": "bounded-index scan over the graph of a closed 1-form (CSV + summary JSON)",
        "twist": "twist certificate over a region (JSON)",
    }
    for name in CONFIG_COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("config", help="JSON run configuration")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="Override a configuration entry, e.g. --set time.dt=0.01 (repeatable)",
        )
        if name != "index":
            p.add_argument("--pdf", metavar="PATH", help="Also export the report as PDF")
        if name in ("scan", "twist"):
            p.add_argument("--threads", type=int, help="Worker threads (default: MASLOV_THREADS)")

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--pdf", metavar="PATH", help="Also export the results as PDF")
    return parser


def run(args: argparse.Namespace) -> int:
    """Dispatch a parsed command line; exceptions propagate to main()."""
    from cli import commands
    from file_handlers.config_loader import load_run_config

    if args.command == "selftest":
        return commands.cmd_selftest(args.pdf)

    cfg = load_run_config(args.config, args.command, args.overrides)
    if args.command == "index":
        return commands.cmd_index(cfg)
    if args.command == "asymptotic":
        return commands.cmd_asymptotic(cfg, args.pdf)
    if args.command == "scan":
        return commands.cmd_scan(cfg, args.pdf, args.threads)
    return commands.cmd_twist(cfg, args.pdf, args.threads)


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the application."""
    args = build_parser().parse_args(argv)

    # Setup logging first
    log_level = getattr(logging, args.log_level.upper(), logging.INFO)
    setup_logging(log_file=args.log_file or None, level=log_level)
    logger.info(f"{APP_NAME} {APP_VERSION}: {args.command}")

    try:
        return run(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except (MaslovError, ValueError, RuntimeError, ArithmeticError, OSError) as e:
        logger.error(f"Numerical error: {e}", exc_info=log_level <= logging.DEBUG)
        return EXIT_NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
