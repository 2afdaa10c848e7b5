"""
Tables command.
Writes C1 or r0 tables for a list of (d, alpha, beta) triples.
"""

import argparse
import logging
from typing import List, Tuple

from core.errors import ConfigError
from core.models import QuadratureSpec
from core.orchestration import ExperimentRunner

logger = logging.getLogger(__name__)


def parse_triple(text: str) -> Tuple[int, float, float]:
    """'d,alpha,beta' -> (d, alpha, beta)."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected d,alpha,beta, got '{text}'")
    try:
        return int(parts[0]), float(parts[1]), float(parts[2])
    except ValueError as e:
        raise ConfigError(f"bad triple '{text}': {e}") from e


class TablesCommand:
    """`tables --what c1|r0 --params d,alpha,beta [...]`"""

    def __init__(self, runner: ExperimentRunner):
        self.runner = runner

    def register(self, subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
        parser = subparsers.add_parser("tables", help="Tabulate the 3G constant C1 or the radius r0")
        parser.add_argument("--what", choices=["c1", "r0"], required=True)
        parser.add_argument("--params", nargs="+", required=True, metavar="D,ALPHA,BETA")
        parser.add_argument("--C", type=float, default=1.0, help="Constant of the power bound (r0 only)")
        parser.add_argument("--eps", type=float, default=0.5, help="Target smallness (r0 only)")
        parser.add_argument("--mesh", type=int, default=0, choices=range(4))
        parser.set_defaults(handler=self.handle)
        return parser

    async def handle(self, args: argparse.Namespace) -> int:
        try:
            triples: List[Tuple[int, float, float]] = [parse_triple(t) for t in args.params]
        except ConfigError as e:
            logger.error(str(e))
            return 2
        outcome = await self.runner.tables(args.what, triples, args.C, args.eps, QuadratureSpec(mesh=args.mesh))
        if outcome.report_path is not None:
            print(f"{'PASSED' if outcome.status == 0 else 'FAILED'}: {outcome.report_path}")
        return outcome.status


def setup(subparsers: argparse._SubParsersAction, runner: ExperimentRunner) -> None:
    """Setup function for the command."""
    TablesCommand(runner).register(subparsers)
