"""
Achievable peak rates of the Gray-Wyner / LFU / TC caching scheme and the
two correlation-unaware baselines it is compared against.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache, partial

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import AsymmetricAuxiliaryError, ValidationError
from .bounds import _check_memory, lb_gw_u_values
from .gray_wyner import (
    MARKOV_TOL,
    SYMMETRY_TOL,
    AuxChannel,
    corner_terms,
    dsbs_plane_aux,
    dsbs_r0_boundary,
    induced_joint,
    markov_defect,
    symmetry_defect,
)
from .info import Bits, JointPmf2, _check_unit_interval, dsbs_parameter, joint_measures
from .optimizer import Mode, Objective, OptimizerConfig, optimize

logger = logging.getLogger(__name__)

SCAN_STEP = 1e-3
REFINE_XATOL = 1e-10
ENTROPY_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class OperatingPoint:
    r0: Bits
    rho: Bits

    def __post_init__(self):
        if not (self.r0 >= 0.0 and self.rho >= 0.0):
            raise ValidationError(
                f"Operating point rates must be nonnegative, got r0={self.r0!r}, rho={self.rho!r}.",
                {"r0": "must be >= 0", "rho": "must be >= 0"},
            )


@dataclass(frozen=True)
class PlanePoint:
    """Minimizer of the achievable rate over the DSBS symmetric plane at one memory."""

    p0: float
    m: Bits
    value: Bits
    rho: Bits
    r0: Bits

    def witness(self) -> AuxChannel:
        return dsbs_plane_aux(self.p0, self.rho)


@dataclass(frozen=True)
class UpperEstimate:
    value: Bits
    witness: AuxChannel
    r0: Bits
    rho: Bits


@dataclass(frozen=True)
class EqualityReport:
    gap: Bits
    symmetry_defect: float
    markov_defect: float

    @property
    def qualifies(self) -> bool:
        return self.symmetry_defect <= SYMMETRY_TOL and self.markov_defect <= MARKOV_TOL


def r_ach_values(r0, rho, m) -> np.ndarray:
    """Vectorized piecewise-linear achievable rate; 0 beyond r0 + 2 rho."""
    r0, rho, m = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (r0, rho, m)))
    value = np.select(
        [m < rho / 2.0, m < r0 + rho, m <= r0 + 2.0 * rho],
        [r0 + 2.0 * rho - 2.0 * m, r0 + 1.5 * rho - m, 0.5 * r0 + rho - 0.5 * m],
        default=0.0,
    )
    return np.maximum(value, 0.0)


def r_ach(p: OperatingPoint, m: Bits) -> Bits:
    """
    Peak rate of the scheme at operating point (R0, rho, rho) and memory m:

        R0 + 2 rho - 2M          on [0, rho/2)
        R0 + 3/2 rho - M         on [rho/2, R0 + rho)
        R0/2 + rho - M/2         on [R0 + rho, R0 + 2 rho]
    """
    m = _check_memory(m)
    return float(r_ach_values(p.r0, p.rho, m))


def r_ach_branch(p: OperatingPoint, m: Bits) -> int:
    """1, 2 or 3 for the active linear piece; 0 beyond r0 + 2 rho."""
    m = _check_memory(m)
    if m < p.rho / 2.0:
        return 1
    if m < p.r0 + p.rho:
        return 2
    if m <= p.r0 + 2.0 * p.rho:
        return 3
    return 0


def ub_gw_u_values(common, private1, private2, m: float) -> np.ndarray:
    """Achievable rate at the corner, with rho covering both private rates."""
    return r_ach_values(common, np.maximum(private1, private2), m)


def ub_gw_objective(m: Bits) -> Objective:
    return Objective("ub_gw", partial(ub_gw_u_values, m=_check_memory(m)))


def r_ub_gw_u(j: JointPmf2, a: AuxChannel, m: Bits) -> Bits:
    """
    Achievable rate with a conditionally symmetric auxiliary, at its corner point.

    Raises:
        AsymmetricAuxiliaryError: if p(x1|u) = p(x2|u) fails beyond 1e-9.
    """
    m = _check_memory(m)
    defect = symmetry_defect(j, a)
    if defect > SYMMETRY_TOL:
        raise AsymmetricAuxiliaryError(defect, SYMMETRY_TOL)
    common, private1, private2, _ = corner_terms(induced_joint(j, a))
    return float(ub_gw_u_values(common, private1, private2, m))


@lru_cache(maxsize=64)
def _plane_boundary(p0: float) -> tuple[np.ndarray, np.ndarray]:
    grid = np.linspace(0.0, 1.0, int(round(1.0 / SCAN_STEP)) + 1)
    boundary = np.array([dsbs_r0_boundary(rho, p0) for rho in grid])
    grid.setflags(write=False)
    boundary.setflags(write=False)
    return grid, boundary


def _plane_rate(rho: float, p0: float, m: float) -> float:
    return float(r_ach_values(dsbs_r0_boundary(rho, p0), rho, m))


def r_ub_gw_dsbs(p0: float, m: Bits) -> PlanePoint:
    """
    Minimum of the achievable rate over the DSBS symmetric plane.

    A 1e-3 grid scan over rho in [0, 1] picks the best cell pair, then a
    bounded scalar search refines inside it; the better of the two wins.
    """
    p0 = _check_unit_interval(p0, "p0", upper=0.5)
    m = _check_memory(m)
    grid, boundary = _plane_boundary(p0)
    scan = r_ach_values(boundary, grid, m)
    k = int(np.argmin(scan))
    best = PlanePoint(p0, m, float(scan[k]), float(grid[k]), float(boundary[k]))

    low, high = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    refined = minimize_scalar(
        _plane_rate,
        bounds=(low, high),
        args=(p0, m),
        method="bounded",
        options={"xatol": REFINE_XATOL},
    )
    rho = float(refined.x)
    if refined.fun < best.value:
        best = PlanePoint(p0, m, float(refined.fun), rho, dsbs_r0_boundary(rho, p0))
    return best


def r_ub_gw(j: JointPmf2, m: Bits, opt: OptimizerConfig | None = None) -> UpperEstimate:
    """
    Achievable rate minimized over auxiliaries, with its witness.

    A DSBS goes through the exact plane search; any other source through the
    optimizer, where rho = max(H(X1|U), H(X2|U)) keeps (R0, rho, rho) in the
    region of every candidate.
    """
    m = _check_memory(m)
    p0 = dsbs_parameter(j)
    if p0 is not None:
        point = r_ub_gw_dsbs(p0, m)
        return UpperEstimate(point.value, point.witness(), point.r0, point.rho)
    result = optimize(j, ub_gw_objective(m), Mode.FREE, opt)
    common, private1, private2, _ = corner_terms(induced_joint(j, result.witness))
    return UpperEstimate(result.value, result.witness, float(common), float(max(private1, private2)))


def baseline_lfu_um(j: JointPmf2, m: Bits) -> Bits:
    """Both caches hold the same prefix of the jointly compressed library; the rest is multicast."""
    m = _check_memory(m)
    return max(joint_measures(j).h12 - m, 0.0)


def baseline_tc(j: JointPmf2, m: Bits) -> Bits:
    """
    Correlation-unaware two-user/two-file coded caching on separately compressed files.

    Raises:
        ValidationError: if H(X1) != H(X2), where the closed form does not apply.
    """
    m = _check_memory(m)
    measures = joint_measures(j)
    if abs(measures.h1 - measures.h2) > ENTROPY_MATCH_TOL:
        raise ValidationError(
            f"The TC baseline needs H(X1) = H(X2), but got {measures.h1:.6f} and {measures.h2:.6f}.",
            {"pmf": "component entropies must match"},
        )
    return float(r_ach_values(0.0, measures.h1, m))


def symmetric_equality_check(j: JointPmf2, a: AuxChannel, grid) -> EqualityReport:
    """
    sup over the grid of |achievable rate - lower bound| at the corner of ``a``.

    The equality is only asserted for symmetric Markov auxiliaries; others get
    their defects reported next to the measured gap.
    """
    common, private1, private2, _ = corner_terms(induced_joint(j, a))
    m = np.asarray(grid, dtype=float)
    if m.size and np.min(m) < 0.0:
        raise ValidationError("Memory grid must be nonnegative.", {"grid": "must be >= 0"})
    upper = ub_gw_u_values(common, private1, private2, m)
    lower = lb_gw_u_values(common, private1, private2, m)
    gap = float(np.max(np.abs(upper - lower))) if m.size else 0.0
    report = EqualityReport(
        gap=gap,
        symmetry_defect=symmetry_defect(j, a) if j.n1 == j.n2 else float("inf"),
        markov_defect=markov_defect(j, a),
    )
    if not report.qualifies:
        logger.warning(
            "Auxiliary is outside the equality regime (symmetry defect %.3e, Markov defect %.3e); gap %.3e.",
            report.symmetry_defect, report.markov_defect, report.gap,
        )
    return report
