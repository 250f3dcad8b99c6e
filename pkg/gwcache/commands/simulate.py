import logging

from ..config import Config
from ..errors import ValidationError
from ..sim.protocol import SourceSpec, exhaustive_verify, run_experiment
from ..sim.sources import DSBS, SHARED
from .utils import add_output_arguments, add_source_arguments, emit, parse_grid, parse_shared, report_service

logger = logging.getLogger(__name__)

DEFAULT_EXHAUSTIVE_N = 4


def source_spec(args) -> SourceSpec:
    if args.p0 is not None:
        return SourceSpec(DSBS, p0=args.p0)
    if args.shared is not None:
        pv, p1, p2 = parse_shared(args.shared)
        return SourceSpec(SHARED, pv=pv, p1=p1, p2=p2)
    raise ValidationError("simulate needs --p0 or --shared.", {"source": "one of --p0, --shared is required"})


def memory_grid(args) -> list[float]:
    if (args.memory is None) == (args.grid is None):
        raise ValidationError("Pass exactly one of --memory and --grid.", {"memory": "or --grid is required"})
    if args.memory is not None:
        return [args.memory]
    return parse_grid(args.grid)


def run_exhaustive(args) -> int:
    n = args.n if args.n is not None else DEFAULT_EXHAUSTIVE_N
    report = exhaustive_verify(n)
    emit(
        {
            "source": SourceSpec(SHARED).to_json(),
            "n": n,
            "seed": 0,
            "rates": None,
            "points": [],
            "success": report.passed,
            "exhaustive": report.to_json(),
        },
        "simulate",
        args.out,
    )
    return 0 if report.passed else 1


def run(args) -> int:
    if args.exhaustive:
        return run_exhaustive(args)
    n = args.n if args.n is not None else Config.BLOCKLENGTH
    seed = args.seed if args.seed is not None else Config.SEED
    sim = run_experiment(source_spec(args), memory_grid(args), n, seed)
    emit(sim.to_json(), "simulate", args.out)
    if args.dump:
        report_service.write_transcripts(args.dump, sim)
    if not sim.success:
        logger.error("At least one delivery failed to decode.")
        return 1
    return 0


def register(subparsers):
    parser = subparsers.add_parser(
        "simulate",
        help="Run the caching scheme bit by bit on a generated library.",
    )
    add_source_arguments(parser, allow_pmf=False, required=False)
    parser.add_argument("--memory", type=float, default=None, help="One memory value M in bits/symbol.")
    parser.add_argument("--grid", default=None, help="Memory grid start:stop:step in bits/symbol.")
    parser.add_argument("--n", type=int, default=None, help="Blocklength (default: GWCACHE_BLOCKLENGTH or 100000; 4 with --exhaustive).")
    parser.add_argument("--seed", type=int, default=None, help="Source seed (default: GWCACHE_SEED or 0).")
    parser.add_argument("--dump", default=None, help="Write the raw codewords as length-prefixed bitstrings.")
    parser.add_argument(
        "--exhaustive",
        action="store_true",
        help="Check every fair-bit shared-component library of length --n instead.",
    )
    add_output_arguments(parser)
    parser.set_defaults(handler=run)
