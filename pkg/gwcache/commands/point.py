"""Single-memory queries: `bounds` and `achievable`."""
from ..core.achievable import OperatingPoint, baseline_lfu_um, baseline_tc, r_ach_branch, r_ub_gw
from ..core.bounds import r_lb, r_lb_active, r_lb_gw, r_lb_gw_u_active
from ..core.info import joint_measures
from ..errors import ValidationError
from .utils import add_optimizer_arguments, add_output_arguments, add_source_arguments, emit, load_source, optimizer_config


def bounds_record(j, m: float, opt=None) -> dict:
    value, witness = r_lb_gw(j, m, opt)
    return {
        "M": m,
        "measures": joint_measures(j).to_json(),
        "R_lb": r_lb(j, m),
        "R_lb_active": r_lb_active(j, m),
        "R_lb_gw": value,
        "R_lb_gw_active": r_lb_gw_u_active(j, witness, m),
        "witness": witness.to_json(),
    }


def achievable_record(j, m: float, opt=None) -> dict:
    estimate = r_ub_gw(j, m, opt)
    try:
        tc = baseline_tc(j, m)
    except ValidationError:
        tc = None
    return {
        "M": m,
        "R_ub_gw": estimate.value,
        "r0": estimate.r0,
        "rho": estimate.rho,
        "branch": r_ach_branch(OperatingPoint(estimate.r0, estimate.rho), m),
        "R_tc": tc,
        "R_lfu_um": baseline_lfu_um(j, m),
        "witness": estimate.witness.to_json(),
    }


def run_bounds(args) -> int:
    j, source = load_source(args)
    emit({"source": source, **bounds_record(j, args.memory, optimizer_config(args))}, "bounds", args.out)
    return 0


def run_achievable(args) -> int:
    j, source = load_source(args)
    emit({"source": source, **achievable_record(j, args.memory, optimizer_config(args))}, "achievable", args.out)
    return 0


def _add_point_arguments(parser):
    add_source_arguments(parser)
    parser.add_argument("--memory", type=float, required=True, help="Cache memory M in bits/symbol.")
    add_optimizer_arguments(parser)
    add_output_arguments(parser)


def register(subparsers):
    parser = subparsers.add_parser("bounds", help="Lower bounds at one memory value, with active constraints.")
    _add_point_arguments(parser)
    parser.set_defaults(handler=run_bounds)

    parser = subparsers.add_parser("achievable", help="Achievable and baseline rates at one memory value.")
    _add_point_arguments(parser)
    parser.set_defaults(handler=run_achievable)
