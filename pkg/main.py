"""
Brownian Regularity Toolkit - Main Entry Point

Random Fourier series experiments: path sampling, norm evaluation,
regularity scans, tail estimates, Wiener-chaos checks and the Brownian
bridge cross-validation.

Usage:
    # Norms of 100 Brownian paths at N = 1024
    python main.py norm --config configs/norm.json --seed 7 --out runs/norm

    # Regularity scan with verdicts (exit 4 on disagreement)
    python main.py scan --workers 4 --verdict

    # Acceptance suite at desk scale
    python main.py accept --out runs/accept
"""

import argparse
import json
import sys
from datetime import datetime

from config.settings import EXIT_CODES, LOGGING_SETTINGS, OUTPUT_SETTINGS, SUBCOMMANDS
from core.errors import ConfigError, ToolkitError
from experiments.config_loader import resolve_config
from experiments.runner import run_experiment
from utils.helpers import format_duration, print_table
from utils.logger import get_logger, set_level

logger = get_logger(__name__, LOGGING_SETTINGS['log_level'])


def build_parser() -> argparse.ArgumentParser:
    """Argument parser shared by every subcommand."""
    parser = argparse.ArgumentParser(
        description='Brownian-type random Fourier series experiments'
    )
    parser.add_argument(
        'subcommand',
        choices=SUBCOMMANDS,
        help='Experiment to run'
    )
    parser.add_argument(
        '--config', '-c',
        type=str,
        default=None,
        help='JSON experiment config'
    )
    parser.add_argument(
        '--seed',
        type=int,
        default=None,
        help='Master seed (unsigned 64-bit)'
    )
    parser.add_argument(
        '--workers', '-w',
        type=int,
        default=None,
        help='Worker processes; outputs do not depend on it'
    )
    parser.add_argument(
        '--out', '-o',
        type=str,
        default=None,
        help='Output directory'
    )
    parser.add_argument(
        '--format',
        choices=OUTPUT_SETTINGS['formats'],
        default=None,
        help='Table format (default: csv)'
    )
    parser.add_argument(
        '--gnuplot',
        action='store_const',
        const=True,
        default=None,
        help='Also write gnuplot scripts for scan, tail, wick and levy'
    )
    parser.add_argument(
        '--verdict',
        action='store_true',
        help='Exit 4 when a scan verdict or check disagrees'
    )
    parser.add_argument(
        '--log-level',
        type=str,
        default=None,
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
        help='Console log level'
    )
    return parser


def report_error(error: ToolkitError):
    """Machine-readable error on stderr."""
    print(json.dumps(error.to_dict(), sort_keys=True, default=str), file=sys.stderr)


def main(argv=None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)

    flags = {
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
        "format": args.format,
        "gnuplot": args.gnuplot,
    }
    try:
        config = resolve_config(args.subcommand, args.config, flags)
    except ConfigError as e:
        report_error(e)
        return EXIT_CODES['config_error']

    print("\n" + "=" * 50)
    print(f"🎲 BROWNIAN REGULARITY TOOLKIT: {config.subcommand}")
    print("=" * 50)
    print(f"Seed: {config.seed}")
    print(f"Samples: {config.samples} | Workers: {config.workers}")
    print(f"Output: {config.out} ({config.format})")
    print("=" * 50 + "\n")

    started = datetime.now()
    try:
        outcome = run_experiment(config, verdict_mode=args.verdict)
    except ConfigError as e:
        report_error(e)
        return EXIT_CODES['config_error']
    except ToolkitError as e:
        logger.error(f"{config.subcommand} failed: {e}")
        report_error(e)
        return EXIT_CODES['runtime_error']
    except Exception as e:
        logger.exception(f"{config.subcommand} crashed")
        print(json.dumps({"error": "runtime-error", "message": str(e), "details": {}}),
              file=sys.stderr)
        return EXIT_CODES['runtime_error']

    if config.subcommand == "accept":
        checks = outcome.summary.get("checks", [])
        print_table([[c["name"], c["passed"], c["statistic"], c["bound"]] for c in checks],
                    ["check", "passed", "statistic", "bound"], title="ACCEPTANCE")
    print_table([[path] for path in outcome.files], ["file"],
                title=f"{len(outcome.files)} files written in {format_duration(started)}")
    if outcome.failed_checks:
        logger.warning(f"Failed checks: {', '.join(outcome.failed_checks)}")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
