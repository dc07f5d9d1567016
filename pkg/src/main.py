# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""wavedecay command-line entry point: certify, run, fit and plot scenarios."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from pydantic import ValidationError
from rich.logging import RichHandler

from reporting import scenario_directory
from scenario import Scenario, load_scenario
from services.certify import certify
from services.fit import refit
from services.plot import replot
from services.run import StageError, run_scenario
from utils import handle_validation_errors, help_summary, validation_messages

logger = logging.getLogger("wavedecay")

EXIT_ERROR = 2

# CLI flag -> scenario key
OVERRIDES = {
    "k_max": "k_max",
    "grid": "grid",
    "cfl": "cfl",
    "t_end": "t_end",
    "delta": "delta",
    "margin": "margin",
    "seed": "seed",
}

Command = Callable[[Scenario, Path], int]


def _run(scenario: Scenario, directory: Path) -> int:
    return run_scenario(scenario, directory).exit_code


COMMANDS: dict[str, Command] = {
    "certify": certify,
    "run": _run,
    "fit": refit,
    "plot": replot,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--scenario",
        action="append",
        required=True,
        type=Path,
        help="Scenario JSON file; repeat to process several scenarios concurrently.",
    )
    common.add_argument(
        "--out", type=Path, default=None, help="Output root (default: $WAVEDECAY_OUTPUT_DIR or results)."
    )
    common.add_argument("--k-max", dest="k_max", type=int, default=None, help="Highest cascade order.")
    common.add_argument("--grid", type=int, default=None, help="Number of radial nodes.")
    common.add_argument("--cfl", type=float, default=None, help="Courant number in (0, 1].")
    common.add_argument("--t-end", dest="t_end", type=float, default=None, help="Final time.")
    common.add_argument("--delta", type=float, default=None, help="Slack exponent of the predicted rates.")
    common.add_argument("--margin", type=float, default=None, help="Verdict margin.")
    common.add_argument("--seed", type=int, default=None, help="Seed of the randomized audits.")
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level.")

    parser = argparse.ArgumentParser(prog="wavedecay", description=help_summary("quick-help"))
    commands = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        commands.add_parser(name, parents=[common], help=help_summary(name), description=help_summary(name))
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=False)],
        force=True,
    )


def prepare(path: Path, args: argparse.Namespace) -> Scenario:
    """Load a scenario file and apply the CLI overrides."""
    updates = {key: getattr(args, flag) for flag, key in OVERRIDES.items()}
    return load_scenario(path).with_overrides(**updates)


def process(command: str, path: Path, args: argparse.Namespace) -> int:
    """Run one subcommand on one scenario file and map failures to exit codes."""
    try:
        scenario = prepare(path, args)
        directory = scenario_directory(scenario.name, root=args.out) if args.out else scenario_directory(scenario.name)
        return COMMANDS[command](scenario, directory)
    except ValidationError as e:
        handle_validation_errors([f"{path}: {message}" for message in validation_messages(e)])
    except StageError as e:
        logger.error("%s: stage %s failed: %s", path, e.stage, e.detail)
    except (ValueError, RuntimeError, ArithmeticError, OSError) as e:
        logger.error("%s: %s", path, e)
    return EXIT_ERROR


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, process every scenario and return the worst exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    paths: list[Path] = args.scenario
    if len(paths) == 1:
        return process(args.command, paths[0], args)
    with ThreadPoolExecutor(max_workers=len(paths)) as pool:
        codes = list(pool.map(lambda p: process(args.command, p, args), paths))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
