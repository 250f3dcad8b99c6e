"""
Exact discrete information measures over finite alphabets.

Every quantity is measured in bits (base-2 logarithms) per source symbol.
The convention 0 log 0 = 0 is applied through scipy's ``entr``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect
from scipy.special import entr

from ..errors import ValidationError
from ..schemas import validate_record

Bits = float

LN2 = math.log(2.0)
INGEST_TOL = 1e-9
RENORM_TOL = 1e-12
INVERSE_XTOL = 1e-14
INVERSE_MAX_ITERS = 200


def _check_unit_interval(value: float, name: str, upper: float = 1.0) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0 or value > upper:
        bound = "1/2" if upper == 0.5 else f"{upper:g}"
        raise ValidationError(
            f"'{name}' must lie in [0, {bound}], but got {value!r}.",
            {name: f"'{name}' must lie in [0, {bound}]."},
        )
    return value


def _as_probabilities(values, name: str = "pmf") -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.size == 0:
        raise ValidationError(f"'{name}' is empty.", {name: "must not be empty."})
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"'{name}' has non-finite entries.", {name: "entries must be finite."})
    if np.any(arr < 0.0):
        raise ValidationError(f"'{name}' has negative entries.", {name: "entries must be nonnegative."})
    total = float(arr.sum())
    if abs(total - 1.0) > INGEST_TOL:
        raise ValidationError(
            f"'{name}' sums to {total!r}, not 1 within {INGEST_TOL:g}.",
            {name: "entries must sum to 1."},
        )
    return arr


def entropy_bits(p: np.ndarray, axis=None) -> np.ndarray:
    """Unchecked entropy in bits along ``axis``; negative entries count as zero."""
    return entr(np.clip(p, 0.0, None)).sum(axis=axis) / LN2


def binary_entropy_array(p: np.ndarray) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    return (entr(p) + entr(1.0 - p)) / LN2


@dataclass(frozen=True, eq=False)
class JointPmf2:
    """
    Joint pmf p(x1, x2) of a two-component discrete memoryless source.

    The matrix is validated on construction, renormalized only when its sum
    drifts from 1 by more than 1e-12 and then frozen, so a pmf written with
    ``to_json`` reads back bit-for-bit.
    """

    p: np.ndarray

    def __post_init__(self):
        arr = np.array(self.p, dtype=float)
        if arr.ndim != 2:
            raise ValidationError("'p' must be a 2-D matrix.", {"p": "must be an n1 x n2 matrix."})
        arr = _as_probabilities(arr, "p")
        total = float(arr.sum())
        if abs(total - 1.0) > RENORM_TOL:
            arr = arr / total
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    @property
    def n1(self) -> int:
        return self.p.shape[0]

    @property
    def n2(self) -> int:
        return self.p.shape[1]

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.p.sum(axis=1), self.p.sum(axis=0)

    def to_json(self) -> dict:
        return {"n1": self.n1, "n2": self.n2, "p": self.p.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "JointPmf2":
        """
        Builds a pmf from its JSON object form.

        Args:
            data: A dict with integer ``n1``, ``n2`` and a row-major ``p``.

        Returns:
            The validated JointPmf2.

        Raises:
            ValidationError: on missing fields, wrong types or a shape mismatch.
        """
        errors = validate_record(data, "pmf")
        if errors:
            raise ValidationError("Pmf file failed validation", errors)
        rows = data["p"]
        if len(rows) != data["n1"] or any(
            not isinstance(row, list) or len(row) != data["n2"] for row in rows
        ):
            raise ValidationError(
                "Pmf matrix shape does not match n1 x n2.",
                {"p": f"must have {data['n1']} rows of {data['n2']} entries."},
            )
        return cls(np.array(rows, dtype=float))


@dataclass(frozen=True)
class JointMeasures:
    h1: Bits
    h2: Bits
    h12: Bits
    h1_given_2: Bits
    h2_given_1: Bits
    mi: Bits

    def to_json(self) -> dict:
        return {
            "H(X1)": self.h1,
            "H(X2)": self.h2,
            "H(X1,X2)": self.h12,
            "H(X1|X2)": self.h1_given_2,
            "H(X2|X1)": self.h2_given_1,
            "I(X1;X2)": self.mi,
        }


def entropy(pmf) -> Bits:
    """
    Shannon entropy of a probability vector, in bits.

    Args:
        pmf: Any array-like of nonnegative entries summing to 1 within 1e-9.

    Returns:
        H = -sum p log2 p, within [0, log2(len(pmf))].
    """
    arr = _as_probabilities(pmf)
    value = float(entropy_bits(arr))
    return min(max(value, 0.0), math.log2(arr.size))


def joint_measures(j: JointPmf2) -> JointMeasures:
    """All six pairwise measures of a JointPmf2, mutually consistent by the chain rule."""
    p1, p2 = j.marginals()
    h12 = float(entropy_bits(j.p))
    h1 = float(entropy_bits(p1))
    h2 = float(entropy_bits(p2))
    return JointMeasures(
        h1=h1,
        h2=h2,
        h12=h12,
        h1_given_2=max(h12 - h2, 0.0),
        h2_given_1=max(h12 - h1, 0.0),
        mi=max(h1 + h2 - h12, 0.0),
    )


def binary_entropy(p: float) -> Bits:
    """h(p) = -p log2 p - (1-p) log2 (1-p)."""
    p = _check_unit_interval(p, "p")
    return float(binary_entropy_array(p))


def binary_entropy_inv(y: Bits) -> float:
    """
    Inverse of the binary entropy on the branch [0, 1/2].

    Bisection on [0, 1/2] down to an interval of width 1e-14 (at most 200
    halvings); the flat top of h near 1/2 needs no special casing.
    """
    y = _check_unit_interval(y, "y")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    return float(
        bisect(
            lambda p: float(binary_entropy_array(p)) - y,
            0.0,
            0.5,
            xtol=INVERSE_XTOL,
            maxiter=INVERSE_MAX_ITERS,
        )
    )


def bernoulli(p: float) -> np.ndarray:
    return np.array([1.0 - p, p])


def dsbs(p0: float) -> JointPmf2:
    """Doubly symmetric binary source with crossover probability p0."""
    p0 = _check_unit_interval(p0, "p0", upper=0.5)
    return JointPmf2(np.array([[(1.0 - p0) / 2.0, p0 / 2.0], [p0 / 2.0, (1.0 - p0) / 2.0]]))


def dsbs_parameter(j: JointPmf2, tol: float = 1e-12) -> float | None:
    """Returns p0 when ``j`` is a DSBS with p0 in [0, 1/2], otherwise None."""
    if j.p.shape != (2, 2):
        return None
    p = j.p
    if abs(p[0, 0] - p[1, 1]) > tol or abs(p[0, 1] - p[1, 0]) > tol:
        return None
    p0 = float(p[0, 1] + p[1, 0])
    if p0 > 0.5 + tol:
        return None
    return min(p0, 0.5)


def shared_component_pmf(pv: float, p1: float, p2: float) -> JointPmf2:
    """
    Joint pmf of X1 = (X1', V), X2 = (X2', V) with V, X1', X2' independent bits.

    Symbols are encoded as 2*x' + v over a 4-ary alphabet, the same encoding
    the simulator uses for its sequences.
    """
    pv = _check_unit_interval(pv, "pv")
    p1 = _check_unit_interval(p1, "p1")
    p2 = _check_unit_interval(p2, "p2")
    pmf_v, pmf_a, pmf_b = bernoulli(pv), bernoulli(p1), bernoulli(p2)
    p = np.zeros((4, 4))
    for v in (0, 1):
        for a in (0, 1):
            for b in (0, 1):
                p[2 * a + v, 2 * b + v] = pmf_v[v] * pmf_a[a] * pmf_b[b]
    return JointPmf2(p)
