import json
import logging
import math
import sys

import numpy as np

from ..core.info import JointPmf2, dsbs, joint_measures, shared_component_pmf
from ..core.optimizer import OptimizerConfig
from ..errors import ValidationError
from ..schemas import validate_record
from ..services.report_service import ReportService

logger = logging.getLogger(__name__)

GRID_TOL = 1e-9

report_service = ReportService()


def add_source_arguments(parser, allow_pmf: bool = True, required: bool = True):
    """--p0 / --pmf / --shared, at most one of them."""
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--p0", type=float, help="DSBS flip probability in [0, 1/2].")
    if allow_pmf:
        group.add_argument("--pmf", help="Path to a JSON pmf file {\"n1\", \"n2\", \"p\"}.")
    group.add_argument(
        "--shared",
        metavar="PV:P1:P2",
        help="Shared-component source X_i = (X_i', V) with the given Bernoulli biases.",
    )


def add_optimizer_arguments(parser):
    parser.add_argument("--restarts", type=int, default=None, help="Optimizer restarts (default: GWCACHE_RESTARTS or 64; GWCACHE_SWEEP_RESTARTS or 8 for sweep).")
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default: GWCACHE_SEED or 0).")
    parser.add_argument("--nu", type=int, default=None, help="Auxiliary alphabet size (default: |X1||X2| + 2).")


def add_output_arguments(parser):
    parser.add_argument("--out", default=None, help="Write the result to this file instead of stdout.")


def parse_shared(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    try:
        if len(parts) != 3:
            raise ValueError(text)
        pv, p1, p2 = (float(part) for part in parts)
    except ValueError:
        raise ValidationError(f"Could not parse '{text}' as PV:P1:P2.", {"shared": "must be PV:P1:P2"})
    return pv, p1, p2


def read_pmf(path: str) -> JointPmf2:
    """
    Loads and validates a pmf file.

    Raises:
        ValidationError: if the file cannot be read or parsed, or fails validation.
    """
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error("Could not load or parse pmf file '%s': %s", path, e)
        raise ValidationError(f"Could not read pmf file '{path}': {e}", {"pmf": "unreadable file"})
    return JointPmf2.from_json(data)


def load_source(args) -> tuple[JointPmf2, dict]:
    """The source pmf named on the command line, with its JSON label."""
    if args.p0 is not None:
        return dsbs(args.p0), {"family": "dsbs", "p0": args.p0}
    if getattr(args, "pmf", None) is not None:
        return read_pmf(args.pmf), {"family": "pmf", "path": args.pmf}
    pv, p1, p2 = parse_shared(args.shared)
    return shared_component_pmf(pv, p1, p2), {"family": "shared", "pv": pv, "p1": p1, "p2": p2}


def optimizer_config(args, restarts: int | None = None) -> OptimizerConfig:
    """Settings from the flags; ``restarts`` replaces the configured default when --restarts is absent."""
    if args.restarts is not None:
        restarts = args.restarts
    return OptimizerConfig.from_config(restarts=restarts, seed=args.seed, nu=args.nu)


def parse_grid(text: str, upper: float | None = None) -> list[float]:
    """
    Points start + k * step of a ``start:stop:step`` grid, stop included.

    With ``upper`` (the joint entropy), a last point that overshoots it by
    less than one step is replaced by ``upper``; any other point beyond it
    is rejected.
    """
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise ValidationError(f"Could not parse grid '{text}' as start:stop:step.", {"grid": "must be start:stop:step"})
    errors = {}
    if not step > 0.0:
        errors["step"] = "must be positive"
    if start < 0.0:
        errors["start"] = "must be nonnegative"
    if stop < start:
        errors["stop"] = "must not be below start"
    if errors:
        raise ValidationError(f"Invalid grid '{text}'.", errors)

    count = int(math.floor((stop - start) / step + GRID_TOL)) + 1
    points = [round(start + k * step, 12) for k in range(count)]
    if upper is not None and points[-1] > upper + GRID_TOL:
        if points[-1] - upper < step and (len(points) == 1 or points[-2] <= upper + GRID_TOL):
            points[-1] = upper
        else:
            raise ValidationError(
                f"Grid '{text}' runs past H(X1,X2) = {upper:.6f}.",
                {"grid": f"stop must not exceed {upper:.6f}"},
            )
    return points


def joint_entropy(j: JointPmf2) -> float:
    return joint_measures(j).h12


def _to_builtin(value):
    if isinstance(value, dict):
        return {key: _to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(item) for item in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def emit(record: dict, schema: str, out: str | None = None) -> dict:
    """
    Adds the success status, checks the record against its schema and writes it.

    Raises:
        ValidationError: if the record fails its schema; nothing is written.
    """
    record = _to_builtin({"status": "success", **record})
    errors = validate_record(record, schema)
    if errors:
        logger.error("Record does not match schema '%s': %s", schema, errors)
        raise ValidationError(f"Output record does not match schema '{schema}'.", errors)
    if out is None:
        sys.stdout.write(report_service.dumps(record) + "\n")
    else:
        report_service.write_json(out, record)
    return record


def error_record(message: str, errors: dict | None = None) -> dict:
    record = {"status": "error", "message": message}
    if errors:
        record["errors"] = errors
    return record
