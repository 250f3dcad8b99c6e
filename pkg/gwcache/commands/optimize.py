from ..core.achievable import r_ub_gw_dsbs, ub_gw_objective
from ..core.bounds import gap_certificate, lb_gw_objective, m1, mi_corner_check
from ..core.info import dsbs_parameter
from ..core.optimizer import Mode, optimize
from ..errors import ValidationError
from .utils import add_optimizer_arguments, add_output_arguments, add_source_arguments, emit, load_source, optimizer_config

OBJECTIVES = ("m1", "m1-symmetric", "lb_gw", "ub_gw", "mi-corner")


def _m1_record(j, symmetric: bool, opt) -> dict:
    report = m1(j, symmetric=symmetric, opt=opt)
    record = {
        "objective": "m1-symmetric" if symmetric else "m1",
        "mode": (Mode.MARKOV_SYMMETRIC if symmetric else Mode.MARKOV).value,
        "value": report.m1,
        "witness": report.witness.to_json(),
        "trace": [restart.to_json() for restart in report.trace],
        "intervals": [list(interval) for interval in report.intervals],
        "beats_seed": report.beats_seed,
    }
    if symmetric:
        record["gap_certificate"] = gap_certificate(j, opt, report=report)
    return record


def _memory_record(j, objective: str, m: float, opt) -> dict:
    p0 = dsbs_parameter(j)
    if objective == "ub_gw" and p0 is not None:
        point = r_ub_gw_dsbs(p0, m)
        return {
            "objective": objective,
            "mode": "plane",
            "value": point.value,
            "witness": point.witness().to_json(),
            "trace": [],
            "M": m,
        }
    target = lb_gw_objective(m) if objective == "lb_gw" else ub_gw_objective(m)
    result = optimize(j, target, Mode.FREE, opt)
    return {**result.to_json(), "M": m, "beats_seed": result.beats_seed}


def optimize_record(j, objective: str, opt=None, m: float | None = None) -> dict:
    """
    Runs one named objective.

    Raises:
        ValidationError: unknown objective, or a memory-dependent objective without M.
    """
    if objective not in OBJECTIVES:
        raise ValidationError(f"Unknown objective '{objective}'.", {"objective": f"must be one of {', '.join(OBJECTIVES)}"})
    if objective in ("m1", "m1-symmetric"):
        return _m1_record(j, objective == "m1-symmetric", opt)
    if objective == "mi-corner":
        report = mi_corner_check(j, opt)
        return {
            "objective": objective,
            "mode": Mode.FREE.value,
            "value": report.excess,
            "witness": report.witness.to_json() if report.witness is not None else None,
            "trace": [],
            "holds": report.holds,
        }
    if m is None:
        raise ValidationError(f"Objective '{objective}' needs --memory.", {"memory": "is required for this objective"})
    return _memory_record(j, objective, m, opt)


def run(args) -> int:
    j, source = load_source(args)
    record = optimize_record(j, args.objective, optimizer_config(args), args.memory)
    emit({"source": source, **record}, "optimize", args.out)
    return 0


def register(subparsers):
    parser = subparsers.add_parser("optimize", help="Search auxiliary channels for one objective.")
    parser.add_argument("objective", choices=OBJECTIVES, help="What to optimize.")
    add_source_arguments(parser)
    parser.add_argument("--memory", type=float, default=None, help="Memory M, for lb_gw and ub_gw.")
    add_optimizer_arguments(parser)
    add_output_arguments(parser)
    parser.set_defaults(handler=run)
