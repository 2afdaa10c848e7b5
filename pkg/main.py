"""
Stable Girsanov Laboratory - Main Entry Point
Simulation and quadrature experiments for jump-intensity changes of measure of stable processes.
"""

import argparse
import asyncio
import importlib
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

from commands import COMMAND_MODULES
from core.orchestration import ExperimentRunner
from core.settings import get_settings
from utils.helpers import setup_logging

# Load environment variables
load_dotenv()

settings = get_settings()
setup_logging(settings.log_level, settings.output_dir / "logs")
logger = logging.getLogger(__name__)


def build_parser(runner: ExperimentRunner) -> argparse.ArgumentParser:
    """Main parser with one sub-command per command module."""
    parser = argparse.ArgumentParser(
        prog="stablegirsanov",
        description="Monte Carlo and quadrature checks for purely discontinuous Girsanov transforms"
    )
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (overrides THREADS)")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMAND_MODULES:
        module = importlib.import_module(name)
        module.setup(subparsers, runner)
        logger.debug(f"Loaded command module: {name}")
    return parser


async def main(argv: Optional[List[str]] = None) -> int:
    """Parse the command line and dispatch to the sub-command."""
    runner = ExperimentRunner(settings)
    parser = build_parser(runner)
    args = parser.parse_args(argv)
    if args.threads:
        runner.workers = args.threads
    logger.info(f"Using {runner.workers} worker threads, output under {runner.output_root()}")
    return await args.handler(args)


if __name__ == "__main__":
    try:
        banner = """
        ╔═══════════════════════════════════════╗
        ║      Stable Girsanov Laboratory       ║
        ║   jump-intensity changes of measure   ║
        ║      for isotropic stable motion      ║
        ╚═══════════════════════════════════════╝
        """
        print(banner)

        sys.exit(asyncio.run(main()))

    except KeyboardInterrupt:
        logger.info("Stopped by user")
        sys.exit(130)
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        sys.exit(1)
