import argparse
import logging
import sys

from .commands import optimize, point, simulate, sweep
from .commands.utils import error_record, report_service
from .config import Config
from .errors import InfeasibleOptimizationError, UnsupportedSourceError, ValidationError

logger = logging.getLogger(__name__)

EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwcache",
        description="Rate-memory bounds and a bit-level simulator for two-receiver caching of correlated files.",
    )
    parser.add_argument("--verbose", action="store_true", help="Log progress at INFO level.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register subcommands
    sweep.register(subparsers)
    point.register(subparsers)
    optimize.register(subparsers)
    simulate.register(subparsers)
    return parser


def _fail(message: str, errors: dict | None, code: int) -> int:
    sys.stdout.write(report_service.dumps(error_record(message, errors)) + "\n")
    return code


def main(argv=None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else Config.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except ValidationError as e:
        logger.error("Validation failed: %s", e.message)
        return _fail(e.message, e.errors, EXIT_VALIDATION)
    except UnsupportedSourceError as e:
        logger.error("Unsupported source: %s", e)
        return _fail(str(e), None, EXIT_VALIDATION)
    except InfeasibleOptimizationError as e:
        logger.error("Optimization failed: %s", e)
        return _fail(str(e), None, EXIT_INFEASIBLE)
