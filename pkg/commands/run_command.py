"""
Run command.
Executes one experiment from a JSON config, with dotted-path overrides.
"""

import argparse
import logging
from pathlib import Path

from core.orchestration import ExperimentRunner

logger = logging.getLogger(__name__)


class RunCommand:
    """`run <config.json> [--override key=value ...]`"""

    def __init__(self, runner: ExperimentRunner):
        self.runner = runner

    def register(self, subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
        parser = subparsers.add_parser("run", help="Run the experiment described by a JSON config")
        parser.add_argument("config", type=Path, help="Experiment config (JSON)")
        parser.add_argument(
            "--override", "-o", action="append", default=[], metavar="KEY=VALUE",
            help="Dotted-path override, e.g. mc.n_paths=2000 (repeatable)"
        )
        parser.set_defaults(handler=self.handle)
        return parser

    async def handle(self, args: argparse.Namespace) -> int:
        """
        Args:
            args: Parsed arguments

        Returns:
            Exit status (0 passed, 1 failed checks, 2 config error)
        """
        outcome = await self.runner.run_file(args.config, args.override)
        if outcome.status == 2:
            logger.error(f"config error: {outcome.message}")
        elif outcome.report_path is not None:
            print(f"{'PASSED' if outcome.status == 0 else 'FAILED'}: {outcome.report_path}")
        return outcome.status


def setup(subparsers: argparse._SubParsersAction, runner: ExperimentRunner) -> None:
    """
    Setup function for the command.

    Args:
        subparsers: Sub-command registry of the main parser
        runner: Shared experiment runner
    """
    RunCommand(runner).register(subparsers)
