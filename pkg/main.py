"""
main.py

Behavior:
    - Command-line entry point of the scenario runner.
    - run <config> [--seed N] [--output DIR] [--threads K] [--format csv|json|both]
    - validate <config>, list-scenarios, history [--output DIR] [--scenario NAME]
    - Only artifact paths and registry rows are printed; results live in files.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from db.connection import get_db, registry_path
from db.db_operations import get_runs
from scenarios import EXIT_CONFIG, EXIT_OK, SCENARIOS, ConfigError, load_config, run_scenario
from scenarios.runner import OUTPUT_ENV, describe_error
from util.helper import DocumentError, configure_logging, dump_json

logger = logging.getLogger(__name__)


# ---------- Argument parsing ----------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtraj", description="Quantum trajectory and Bell-process scenario runner")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one scenario from a config file or manifest")
    run.add_argument("config", help="JSON config document, or manifest.json of an earlier run")
    run.add_argument("--seed", type=int, help="overrides the config seed")
    run.add_argument("--output", help=f"output directory; overrides {OUTPUT_ENV} and the config")
    run.add_argument("--threads", type=int,
                     help="worker threads for path-level parallelism (default: config value, else available cores)")
    run.add_argument("--format", choices=["csv", "json", "both"], help="table format; overrides the config")

    validate = commands.add_parser("validate", help="check a config and print it fully resolved")
    validate.add_argument("config")

    commands.add_parser("list-scenarios", help="list scenario names")

    history = commands.add_parser("history", help="list runs recorded in an output directory")
    history.add_argument("--output", help=f"output directory (default: ${OUTPUT_ENV} or runs)")
    history.add_argument("--scenario", help="only runs of this scenario")
    return parser


# ---------- Commands ----------
def _load(path: str, overrides: Optional[dict] = None):
    try:
        return load_config(path, overrides)
    except (ConfigError, DocumentError) as exc:
        for line in describe_error(exc):
            print(f"config error: {line}", file=sys.stderr)
        return None


def command_run(args: argparse.Namespace) -> int:
    config = _load(args.config, {"seed": args.seed, "output_dir": args.output, "threads": args.threads,
                                 "format": args.format})
    if config is None:
        return EXIT_CONFIG
    outcome = run_scenario(config)
    for entry in outcome.artifacts:
        print(os.path.join(outcome.run_dir, entry["path"]))
    print(outcome.manifest_path)
    if outcome.exit_code != EXIT_OK:
        print(f"{outcome.status}: {outcome.error}", file=sys.stderr)
    return outcome.exit_code


def command_validate(args: argparse.Namespace) -> int:
    config = _load(args.config)
    if config is None:
        return EXIT_CONFIG
    sys.stdout.write(dump_json(config.resolved()))
    return EXIT_OK


def command_list(args: argparse.Namespace) -> int:
    for name, scenario in SCENARIOS.items():
        print(f"{name}\t{scenario.summary}")
    return EXIT_OK


def command_history(args: argparse.Namespace) -> int:
    output_dir = args.output or os.environ.get(OUTPUT_ENV) or "runs"
    if not os.path.exists(registry_path(output_dir)):
        logger.warning("Scenario Runner: no registry in %s", output_dir)
        return EXIT_OK
    with get_db(output_dir) as db:
        for run in get_runs(db, args.scenario):
            wall = "" if run.wall_time is None else f"{run.wall_time:.2f}"
            print("\t".join([str(run.run_id), run.scenario, run.seed, run.status, wall, run.manifest_path or ""]))
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "validate": command_validate,
    "list-scenarios": command_list,
    "history": command_history,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(1 if args.verbose else -1 if args.quiet else 0)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
