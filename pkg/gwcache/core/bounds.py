"""
Lower bounds on the peak rate-memory trade-off of the two-receiver,
two-file caching network, and where they coincide.
"""
import logging
from dataclasses import dataclass
from functools import partial

import numpy as np

from ..errors import ValidationError
from .gray_wyner import AuxChannel, corner_terms, induced_joint
from .info import Bits, JointPmf2, joint_measures
from .optimizer import Mode, Objective, OptimizerConfig, optimize

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12
MI_CORNER_TOL = 1e-9


@dataclass(frozen=True)
class RateMemoryPoint:
    m: Bits
    r: Bits


@dataclass(frozen=True)
class CoincidenceReport:
    """Largest M1 found, with the memory intervals where the lower bounds meet."""

    m1: Bits
    intervals: tuple[tuple[Bits, Bits], tuple[Bits, Bits]]
    witness: AuxChannel
    symmetric: bool
    beats_seed: bool
    trace: list

    def contains(self, m: Bits) -> bool:
        return any(low <= m <= high for low, high in self.intervals)

    def to_json(self) -> dict:
        return {
            "M1": self.m1,
            "symmetric": self.symmetric,
            "intervals": [list(interval) for interval in self.intervals],
            "witness": self.witness.to_json(),
            "beats_seed": self.beats_seed,
        }


@dataclass(frozen=True)
class MiCornerReport:
    holds: str
    excess: Bits
    witness: AuxChannel | None

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "excess": self.excess,
            "witness": self.witness.to_json() if self.witness is not None else None,
        }


def _check_memory(m: Bits) -> float:
    m = float(m)
    if not np.isfinite(m) or m < 0.0:
        raise ValidationError(f"Memory M must be a nonnegative number, but got {m!r}.", {"M": "must be >= 0"})
    return m


def _active(values: list[float]) -> int:
    best = max(values)
    return next(index for index, value in enumerate(values) if value >= best - TIE_TOL)


def r_lb_terms(j: JointPmf2, m: Bits) -> list[float]:
    """[0, H - 2m, (H - m)/2, (H + max(H1, H2))/2 - m] with H = H(X1,X2)."""
    m = _check_memory(m)
    measures = joint_measures(j)
    h = measures.h12
    return [0.0, h - 2.0 * m, (h - m) / 2.0, (h + max(measures.h1, measures.h2)) / 2.0 - m]


def r_lb(j: JointPmf2, m: Bits) -> Bits:
    """Cut-set lower bound on the optimal peak rate at memory m."""
    return max(r_lb_terms(j, m))


def r_lb_active(j: JointPmf2, m: Bits) -> int:
    """Index into ``r_lb_terms`` of the binding constraint; 0 means the clamp at zero."""
    return _active(r_lb_terms(j, m))


def r_lb_curve(j: JointPmf2, grid) -> list[RateMemoryPoint]:
    """Cut-set bound sampled on a memory grid."""
    return [RateMemoryPoint(m, r_lb(j, m)) for m in grid]


def lb_gw_u_values(common, private1, private2, m: float) -> np.ndarray:
    """Vectorized lower bound for Gray-Wyner based schemes at a corner (i, h1, h2)."""
    total = common + private1 + private2
    terms = np.broadcast_arrays(
        total - 2.0 * m,
        (total - m) / 2.0,
        common + private1 + private2 / 2.0 - m,
        common + private1 / 2.0 + private2 - m,
    )
    return np.maximum(np.maximum.reduce(terms), 0.0)


def r_lb_gw_u_terms(j: JointPmf2, a: AuxChannel, m: Bits) -> list[float]:
    m = _check_memory(m)
    common, private1, private2, _ = corner_terms(induced_joint(j, a))
    total = float(common + private1 + private2)
    return [
        0.0,
        total - 2.0 * m,
        (total - m) / 2.0,
        float(common + private1 + private2 / 2.0) - m,
        float(common + private1 / 2.0 + private2) - m,
    ]


def r_lb_gw_u(j: JointPmf2, a: AuxChannel, m: Bits) -> Bits:
    """
    Lower bound on the peak rate of any Gray-Wyner based scheme using auxiliary ``a``.

    Always at least ``r_lb(j, m)``.
    """
    m = _check_memory(m)
    common, private1, private2, _ = corner_terms(induced_joint(j, a))
    return float(lb_gw_u_values(common, private1, private2, m))


def r_lb_gw_u_active(j: JointPmf2, a: AuxChannel, m: Bits) -> int:
    return _active(r_lb_gw_u_terms(j, a, m))


def lb_gw_objective(m: Bits) -> Objective:
    return Objective("lb_gw", partial(lb_gw_u_values, m=_check_memory(m)))


def _half_min_private(common, private1, private2) -> np.ndarray:
    return 0.5 * np.minimum(private1, private2)


def m1_objective() -> Objective:
    return Objective("m1", _half_min_private, maximize=True)


def _corner_excess(common, private1, private2, target: tuple[float, float, float]) -> np.ndarray:
    return (
        np.maximum(common - target[0], 0.0)
        + np.maximum(private1 - target[1], 0.0)
        + np.maximum(private2 - target[2], 0.0)
    )


def mi_corner_objective(j: JointPmf2) -> Objective:
    measures = joint_measures(j)
    target = (measures.mi, measures.h1_given_2, measures.h2_given_1)
    return Objective("mi-corner", partial(_corner_excess, target=target))


def r_lb_gw(
    j: JointPmf2,
    m: Bits,
    opt: OptimizerConfig | None = None,
    extra_witnesses: tuple[AuxChannel, ...] | list[AuxChannel] = (),
) -> tuple[Bits, AuxChannel]:
    """
    Estimate of the infimum of ``r_lb_gw_u`` over auxiliaries, with its witness.

    The value is an upper estimate of the true infimum and never below ``r_lb``.
    """
    result = optimize(j, lb_gw_objective(m), Mode.FREE, opt, extra_witnesses)
    return result.value, result.witness


def m1(j: JointPmf2, symmetric: bool = False, opt: OptimizerConfig | None = None) -> CoincidenceReport:
    """
    Maximize 1/2 min(H(X1|U), H(X2|U)) over Markov chains X1 - U - X2.

    With ``symmetric`` the channel must also satisfy p(x1|u) = p(x2|u), which
    needs equal alphabets. The lower bounds coincide on [0, M1] and on
    [H - 2 M1, H].

    Raises:
        ValidationError: symmetric search on unequal alphabets.
    """
    mode = Mode.MARKOV_SYMMETRIC if symmetric else Mode.MARKOV
    result = optimize(j, m1_objective(), mode, opt)
    h = joint_measures(j).h12
    value = result.value
    if result.beats_seed:
        logger.info("Optimizer improved on the seeded witnesses for M1: %.9f vs %.9f.", value, result.seed_value)
    return CoincidenceReport(
        m1=value,
        intervals=((0.0, value), (max(h - 2.0 * value, 0.0), h)),
        witness=result.witness,
        symmetric=symmetric,
        beats_seed=result.beats_seed,
        trace=result.trace,
    )


def mi_corner_check(j: JointPmf2, opt: OptimizerConfig | None = None) -> MiCornerReport:
    """
    Looks for U whose corner is dominated by (I(X1;X2), H(X1|X2), H(X2|X1)).

    Returns "yes" with a witness when found, "unknown" otherwise; a miss does
    not disprove membership.
    """
    result = optimize(j, mi_corner_objective(j), Mode.FREE, opt)
    if result.value <= MI_CORNER_TOL:
        return MiCornerReport("yes", result.value, result.witness)
    logger.info("No auxiliary reaches the mutual-information corner; smallest excess %.6f.", result.value)
    return MiCornerReport("unknown", result.value, None)


def gap_certificate(
    j: JointPmf2,
    opt: OptimizerConfig | None = None,
    report: CoincidenceReport | None = None,
) -> Bits:
    """
    Worst-case gap between the achievable rate and the optimum:
    1/2 min(H(X1|X2), H(X2|X1)) - M~1, clamped at 0.

    Pass a symmetric ``report`` to reuse an existing search.
    """
    if report is None or not report.symmetric:
        report = m1(j, symmetric=True, opt=opt)
    measures = joint_measures(j)
    return max(0.5 * min(measures.h1_given_2, measures.h2_given_1) - report.m1, 0.0)
