"""
Gray-Wyner region evaluation for a given auxiliary channel.

An auxiliary channel p(u|x1,x2) is stored as a nu x (n1*n2) matrix whose
column x1*n2 + x2 is the conditional pmf of U given (x1, x2). Its Gray-Wyner
corner is (I(X1,X2;U), H(X1|U), H(X2|U)) under the induced joint
p(u, x1, x2) = p(u|x1,x2) p(x1,x2).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import xlogy

from ..errors import ValidationError
from ..schemas import validate_record
from .info import (
    LN2,
    Bits,
    JointPmf2,
    _check_unit_interval,
    binary_entropy,
    binary_entropy_inv,
    entropy_bits,
)

logger = logging.getLogger(__name__)

COLUMN_TOL = 1e-9
MARKOV_TOL = 1e-9
SYMMETRY_TOL = 1e-9
WYNER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AuxChannel:
    """p(u|x1,x2) as a nu x (n1*n2) column-stochastic matrix."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValidationError("'w' must be a nonempty nu x (n1*n2) matrix.", {"w": "bad shape"})
        if not np.all(np.isfinite(w)) or np.any(w < 0.0):
            raise ValidationError("'w' has negative or non-finite entries.", {"w": "entries must be >= 0"})
        sums = w.sum(axis=0)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > COLUMN_TOL:
            raise ValidationError(
                f"Columns of 'w' must sum to 1 within {COLUMN_TOL:g}; worst deviation {worst:.3e}.",
                {"w": "columns must be probability vectors"},
            )
        if worst > 1e-12:
            w = w / sums
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def nu(self) -> int:
        return self.w.shape[0]

    def to_json(self) -> dict:
        return {"nu": self.nu, "w": self.w.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "AuxChannel":
        errors = validate_record(data, "aux")
        if errors:
            raise ValidationError("Auxiliary channel file failed validation", errors)
        rows = data["w"]
        if len(rows) != data["nu"] or not rows or any(
            not isinstance(row, list) or len(row) != len(rows[0]) for row in rows
        ):
            raise ValidationError(
                "Auxiliary matrix shape does not match nu.",
                {"w": f"must have {data['nu']} rows of equal length."},
            )
        return cls(np.array(rows, dtype=float))


@dataclass(frozen=True)
class RateTriplet:
    r0: Bits
    r1: Bits
    r2: Bits

    def dominates(self, other: "RateTriplet", tol: float = 1e-9) -> bool:
        return (
            self.r0 >= other.r0 - tol
            and self.r1 >= other.r1 - tol
            and self.r2 >= other.r2 - tol
        )

    def to_json(self) -> dict:
        return {"R0": self.r0, "R1": self.r1, "R2": self.r2}


def induced_joint(j: JointPmf2, a: AuxChannel) -> np.ndarray:
    """p(u, x1, x2) as a nu x n1 x n2 array."""
    if a.w.shape[1] != j.n1 * j.n2:
        raise ValidationError(
            f"Auxiliary channel has {a.w.shape[1]} columns but the source has {j.n1}x{j.n2} symbol pairs.",
            {"w": f"must have {j.n1 * j.n2} columns"},
        )
    return a.w.reshape(a.nu, j.n1, j.n2) * j.p[None, :, :]


def corner_terms(q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    (I(X1,X2;U), H(X1|U), H(X2|U), I(X1;X2|U)) for joint arrays q[..., u, x1, x2].

    Leading axes are batch axes; each term is clamped at 0.
    """
    h_ux = entropy_bits(q, axis=(-3, -2, -1))
    h_u = entropy_bits(q.sum(axis=(-2, -1)), axis=-1)
    h_x = entropy_bits(q.sum(axis=-3), axis=(-2, -1))
    h_u1 = entropy_bits(q.sum(axis=-1), axis=(-2, -1))
    h_u2 = entropy_bits(q.sum(axis=-2), axis=(-2, -1))
    common = np.maximum(h_u + h_x - h_ux, 0.0)
    private1 = np.maximum(h_u1 - h_u, 0.0)
    private2 = np.maximum(h_u2 - h_u, 0.0)
    cmi = np.maximum(h_u1 + h_u2 - h_ux - h_u, 0.0)
    return common, private1, private2, cmi


def gw_corner(j: JointPmf2, a: AuxChannel) -> RateTriplet:
    """
    Corner point of the Gray-Wyner region of auxiliary ``a``.

    Raises:
        ValidationError: if the channel's column count is not n1*n2.
    """
    common, private1, private2, _ = corner_terms(induced_joint(j, a))
    return RateTriplet(float(common), float(private1), float(private2))


def in_region(t: RateTriplet, j: JointPmf2, a: AuxChannel, tol: float = 1e-9) -> bool:
    return t.dominates(gw_corner(j, a), tol)


def markov_defect(j: JointPmf2, a: AuxChannel) -> float:
    """I(X1;X2|U) under the induced joint; zero iff X1 - U - X2."""
    return float(corner_terms(induced_joint(j, a))[3])


def symmetry_defect(j: JointPmf2, a: AuxChannel) -> float:
    """
    max over (u, x) of |p(u, x1=x) - p(u, x2=x)|.

    Zero exactly when p(x1|u) = p(x2|u) on the support of U.

    Raises:
        ValidationError: for unequal alphabets, where the constraint is undefined.
    """
    if j.n1 != j.n2:
        raise ValidationError(
            f"Conditional symmetry needs n1 = n2, but the source is {j.n1}x{j.n2}.",
            {"p": "alphabets must match for the symmetric constraint"},
        )
    q = induced_joint(j, a)
    return float(np.max(np.abs(q.sum(axis=2) - q.sum(axis=1))))


def aux_from_joint(q: np.ndarray) -> AuxChannel:
    """
    Bayes inversion of a joint p(u, x1, x2) into p(u|x1,x2).

    Zero-mass columns are sent to u = 0.
    """
    nu = q.shape[0]
    flat = np.clip(q.reshape(nu, -1), 0.0, None)
    mass = flat.sum(axis=0)
    w = np.zeros_like(flat)
    support = mass > 0.0
    w[:, support] = flat[:, support] / mass[support]
    w[0, ~support] = 1.0
    return AuxChannel(w)


def constant_aux(j: JointPmf2) -> AuxChannel:
    return AuxChannel(np.ones((1, j.n1 * j.n2)))


def identity_aux(j: JointPmf2) -> AuxChannel:
    """U = (X1, X2), labelled by the column index."""
    return AuxChannel(np.eye(j.n1 * j.n2))


def common_part_aux(j: JointPmf2) -> AuxChannel:
    """
    Extractor of the common part V of (X1, X2).

    V is the connected component of the pair in the bipartite support graph
    of p(x1, x2), so it is a function of X1 alone and of X2 alone.
    """
    n1, n2 = j.n1, j.n2
    rows, cols = np.nonzero(j.p > 0.0)
    graph = csr_matrix(
        (np.ones(len(rows)), (rows, cols + n1)),
        shape=(n1 + n2, n1 + n2),
    )
    _, labels = connected_components(graph, directed=False)

    # relabel the components that carry mass as 0, 1, ...
    used = sorted({int(labels[x1]) for x1 in rows})
    index = {label: k for k, label in enumerate(used)}
    w = np.zeros((max(len(used), 1), n1 * n2))
    for x1 in range(n1):
        for x2 in range(n2):
            w[index.get(int(labels[x1]), 0), x1 * n2 + x2] = 1.0
    return AuxChannel(w)


def dsbs_p1(p0: float) -> float:
    """Crossover a of the Wyner construction that reproduces a DSBS(p0): 2a(1-a) = p0."""
    p0 = _check_unit_interval(p0, "p0", upper=0.5)
    return (1.0 - math.sqrt(1.0 - 2.0 * p0)) / 2.0


def _wyner_joint(a: float) -> np.ndarray:
    """p(u, x1, x2) with U ~ Bern(1/2) and Xi = U xor Zi, Zi ~ Bern(a)."""
    flip = np.array([[1.0 - a, a], [a, 1.0 - a]])  # flip[u, x] = P(Z = x xor u)
    return 0.5 * flip[:, :, None] * flip[:, None, :]


def wyner_aux_dsbs(p0: float, a: float, strict: bool = False) -> AuxChannel:
    """
    The Wyner auxiliary for a DSBS(p0): U ~ Bern(1/2), Xi = U xor Zi, Zi ~ Bern(a).

    Args:
        p0: DSBS crossover probability in [0, 1/2].
        a: Per-component flip probability in [0, 1/2].
        strict: Require 2a(1-a) = p0, i.e. the Markov construction.

    Returns:
        p(u|x1,x2) obtained by Bayes inversion of the construction.

    Raises:
        ValidationError: for out-of-range inputs, or a (p0, a) mismatch in strict mode.
    """
    p0 = _check_unit_interval(p0, "p0", upper=0.5)
    a = _check_unit_interval(a, "a", upper=0.5)
    if strict and abs(2.0 * a * (1.0 - a) - p0) > WYNER_TOL:
        raise ValidationError(
            f"Wyner crossover a={a!r} does not reproduce p0={p0!r}: 2a(1-a) = {2.0 * a * (1.0 - a)!r}.",
            {"a": "must satisfy 2a(1-a) = p0"},
        )
    return aux_from_joint(_wyner_joint(a))


def dsbs_r0_boundary(rho: Bits, p0: float) -> Bits:
    """
    Minimal R0 on the symmetric plane R1 = R2 = rho of a DSBS(p0).

    1 + h(p0) - 2 rho below h(p1); above it the curve
    f(rho) = 1 + h(p0) + (a - p0/2) log(a - p0/2) + p0 log(p0/2)
             + (1 - a - p0/2) log(1 - a - p0/2),  a = h^-1(rho).
    """
    rho = _check_unit_interval(rho, "rho")
    p0 = _check_unit_interval(p0, "p0", upper=0.5)
    joint = 1.0 + binary_entropy(p0)
    if rho < binary_entropy(dsbs_p1(p0)):
        return max(joint - 2.0 * rho, 0.0)

    a = binary_entropy_inv(rho)
    c = p0 / 2.0
    low, high = a - c, 1.0 - a - c
    if low < -1e-12:
        raise ValidationError(
            f"h^-1(rho) - p0/2 = {low!r} is negative at rho={rho!r}, p0={p0!r}.",
            {"rho": "outside the f-branch domain"},
        )
    low = max(low, 0.0)
    value = joint + (xlogy(low, low) + 2.0 * xlogy(c, c) + xlogy(high, high)) / LN2
    return max(float(value), 0.0)


def dsbs_plane_aux(p0: float, rho: Bits) -> AuxChannel:
    """
    An auxiliary whose corner is (dsbs_r0_boundary(rho, p0), rho, rho).

    On the curved branch it is the conditionally symmetric binary channel with
    p(x1,x2|u=0) = [[1-a-c, c], [c, a-c]], c = p0/2, and its mirror for u=1.
    Below h(p1) it time-shares U = (X1, X2) (weight 1 - rho/h(p1)) with the
    Wyner auxiliary at a = p1 on disjoint labels, six in total.
    """
    p0 = _check_unit_interval(p0, "p0", upper=0.5)
    rho = _check_unit_interval(rho, "rho")
    p1 = dsbs_p1(p0)
    h_p1 = binary_entropy(p1)
    c = p0 / 2.0

    if rho >= h_p1:
        a = max(binary_entropy_inv(rho), c)
        given_zero = np.array([[1.0 - a - c, c], [c, a - c]])
        q = 0.5 * np.stack([given_zero, given_zero[::-1, ::-1]])
        return aux_from_joint(q)

    weight = 1.0 - rho / h_p1
    wyner = wyner_aux_dsbs(p0, p1).w
    w = np.vstack([weight * np.eye(4), (1.0 - weight) * wyner])
    logger.debug("Plane auxiliary at rho=%.6f time-shares with weight %.6f on U=(X1,X2).", rho, weight)
    return AuxChannel(w)
