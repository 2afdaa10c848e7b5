"""
Validate command.
Runs the cross-estimator consistency battery over a parameter matrix.
"""

import argparse
import json
import logging
from pathlib import Path

from core.errors import ConfigError
from core.orchestration import MATRICES, ExperimentRunner

logger = logging.getLogger(__name__)


class ValidateCommand:
    """`validate [--matrix default|minimal|empty] [--config base.json]`"""

    def __init__(self, runner: ExperimentRunner):
        self.runner = runner

    def register(self, subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
        parser = subparsers.add_parser("validate", help="Run the validation battery")
        parser.add_argument("--matrix", choices=sorted(MATRICES), default="default")
        parser.add_argument("--config", type=Path, default=None, help="Base config for kernel, mc and quad settings")
        parser.add_argument("--override", "-o", action="append", default=[], metavar="KEY=VALUE")
        parser.set_defaults(handler=self.handle)
        return parser

    async def handle(self, args: argparse.Namespace) -> int:
        base = None
        if args.config is not None or args.override:
            try:
                document = json.loads(args.config.read_text(encoding="utf-8")) if args.config else {}
                document.setdefault("experiment", "validate")
                document.setdefault("params", {"d": 1, "alpha": 0.5})
                base = self.runner.load_config(document, args.override)
            except (OSError, json.JSONDecodeError, ConfigError) as e:
                logger.error(f"config error: {e}")
                return 2
        outcome = await self.runner.validate_suite(args.matrix, base)
        if outcome.report_path is not None:
            print(f"{'PASSED' if outcome.status == 0 else 'FAILED'}: {outcome.report_path}")
        return outcome.status


def setup(subparsers: argparse._SubParsersAction, runner: ExperimentRunner) -> None:
    """Setup function for the command."""
    ValidateCommand(runner).register(subparsers)
