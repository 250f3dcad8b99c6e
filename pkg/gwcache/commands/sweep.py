import logging
from dataclasses import dataclass

from ..config import Config
from ..core.achievable import baseline_lfu_um, baseline_tc, r_ub_gw
from ..core.bounds import r_lb_curve, r_lb_gw
from ..core.info import JointPmf2
from ..core.optimizer import OptimizerConfig
from ..errors import ValidationError
from .utils import (
    add_optimizer_arguments,
    add_source_arguments,
    joint_entropy,
    load_source,
    optimizer_config,
    parse_grid,
    report_service,
)

logger = logging.getLogger(__name__)

CURVE_NAMES = {
    "lb": "R_lb",
    "lb_gw": "R_lb_gw",
    "ub_gw": "R_ub_gw",
    "tc": "R_tc",
    "lfu_um": "R_lfu_um",
}


@dataclass(frozen=True)
class SweepSpec:
    j: JointPmf2
    grid: list[float]
    curves: tuple[str, ...]
    opt: OptimizerConfig | None = None


def parse_curves(text: str) -> tuple[str, ...]:
    curves = tuple(name.strip() for name in text.split(",") if name.strip())
    unknown = [name for name in curves if name not in CURVE_NAMES]
    if unknown or not curves:
        raise ValidationError(
            f"Unknown curves {unknown}; choose from {', '.join(CURVE_NAMES)}.",
            {"curves": f"must be a subset of {', '.join(CURVE_NAMES)}"},
        )
    return curves


def compute_sweep(spec: SweepSpec) -> list[dict]:
    """
    One row per memory point with every requested curve.

    The achievable-rate witness at each point seeds the GW lower-bound search,
    so R_lb_gw never exceeds R_ub_gw on a row; the previous point's lower-bound
    witness is a warm start as well.
    """
    tc_applicable = "tc" in spec.curves
    lower = r_lb_curve(spec.j, spec.grid) if "lb" in spec.curves else None
    previous = None
    rows = []
    for k, m in enumerate(spec.grid):
        row = {"M": m}
        if lower is not None:
            row["R_lb"] = lower[k].r
        witnesses = []
        if "ub_gw" in spec.curves:
            estimate = r_ub_gw(spec.j, m, spec.opt)
            row["R_ub_gw"] = estimate.value
            witnesses.append(estimate.witness)
        if "lb_gw" in spec.curves:
            if previous is not None:
                witnesses.append(previous)
            row["R_lb_gw"], previous = r_lb_gw(spec.j, m, spec.opt, extra_witnesses=witnesses)
        if tc_applicable:
            try:
                row["R_tc"] = baseline_tc(spec.j, m)
            except ValidationError as e:
                logger.warning("Leaving the TC column blank: %s", e.message)
                tc_applicable = False
        if "lfu_um" in spec.curves:
            row["R_lfu_um"] = baseline_lfu_um(spec.j, m)
        logger.info("Sweep point M=%.4f done.", m)
        rows.append(row)
    return rows


def run(args) -> int:
    j, source = load_source(args)
    spec = SweepSpec(
        j=j,
        grid=parse_grid(args.grid, joint_entropy(j)),
        curves=parse_curves(args.curves),
        opt=optimizer_config(args, restarts=Config.SWEEP_RESTARTS),
    )
    rows = compute_sweep(spec)
    report_service.write_csv(args.out, rows)
    if args.svg:
        label = f"DSBS p0 = {source['p0']}" if source["family"] == "dsbs" else "Rate-memory trade-off"
        report_service.write_svg(args.svg, rows, title=label)
    return 0


def register(subparsers):
    parser = subparsers.add_parser(
        "sweep",
        help="Sample the rate-memory curves over a memory grid and write them as CSV.",
    )
    add_source_arguments(parser)
    parser.add_argument("--grid", required=True, help="Memory grid start:stop:step in bits/symbol, e.g. 0:1.73:0.01.")
    parser.add_argument(
        "--curves",
        default=",".join(CURVE_NAMES),
        help=f"Comma-separated subset of {', '.join(CURVE_NAMES)} (default: all).",
    )
    parser.add_argument("--out", required=True, help="Output CSV path.")
    parser.add_argument("--svg", default=None, help="Optional SVG chart path.")
    add_optimizer_arguments(parser)
    parser.set_defaults(handler=run)
