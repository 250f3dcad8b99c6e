"""
Source realizations with their latent streams.

Random streams come from numpy's PCG64 seeded with SeedSequence([seed,
stream_id]): stream 0 is the shared component (V or U), streams 1 and 2
the per-file components (X1', X2' or Z1, Z2).
"""
from dataclasses import dataclass, field

import numpy as np

from ..core.gray_wyner import dsbs_p1
from ..core.info import _check_unit_interval
from ..errors import ValidationError

SHARED = "shared"
DSBS = "dsbs"


@dataclass(frozen=True, eq=False)
class LibraryRealization:
    """
    One draw of the two files.

    Shared-component symbols are 2*x' + v over {0, 1, 2, 3}; DSBS symbols are bits.
    """

    family: str
    n: int
    x1: np.ndarray
    x2: np.ndarray
    params: dict[str, float]
    latent: dict[str, np.ndarray] | None = field(default=None)

    def file(self, index: int) -> np.ndarray:
        return self.x1 if index == 1 else self.x2


def stream(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream_id]))


def _bernoulli(seed: int, stream_id: int, n: int, p: float) -> np.ndarray:
    return (stream(seed, stream_id).random(n) < p).astype(np.uint8)


def _check_size(n: int, seed: int):
    errors = {}
    if n < 1:
        errors["n"] = "must be at least 1"
    if seed < 0:
        errors["seed"] = "must be nonnegative"
    if errors:
        raise ValidationError("Invalid realization request", errors)


def shared_realization(v: np.ndarray, x1p: np.ndarray, x2p: np.ndarray, pv=0.5, p1=0.5, p2=0.5) -> LibraryRealization:
    v, x1p, x2p = (np.asarray(s, dtype=np.uint8) for s in (v, x1p, x2p))
    return LibraryRealization(
        family=SHARED,
        n=len(v),
        x1=(2 * x1p + v).astype(np.uint8),
        x2=(2 * x2p + v).astype(np.uint8),
        params={"pv": pv, "p1": p1, "p2": p2},
        latent={"v": v, "x1p": x1p, "x2p": x2p},
    )


def gen_shared_component(n: int, pv: float, p1: float, p2: float, seed: int) -> LibraryRealization:
    """X1 = (X1', V), X2 = (X2', V) with independent Bernoulli V, X1', X2'."""
    _check_size(n, seed)
    pv = _check_unit_interval(pv, "pv")
    p1 = _check_unit_interval(p1, "p1")
    p2 = _check_unit_interval(p2, "p2")
    return shared_realization(
        _bernoulli(seed, 0, n, pv),
        _bernoulli(seed, 1, n, p1),
        _bernoulli(seed, 2, n, p2),
        pv, p1, p2,
    )


def gen_dsbs_wyner(n: int, p0: float, seed: int) -> LibraryRealization:
    """Xi = U xor Zi with U ~ Bern(1/2) and Zi ~ Bern(p1), so (X1, X2) is a DSBS(p0)."""
    _check_size(n, seed)
    p0 = _check_unit_interval(p0, "p0", upper=0.5)
    a = dsbs_p1(p0)
    u = _bernoulli(seed, 0, n, 0.5)
    z1 = _bernoulli(seed, 1, n, a)
    z2 = _bernoulli(seed, 2, n, a)
    return LibraryRealization(
        family=DSBS,
        n=n,
        x1=u ^ z1,
        x2=u ^ z2,
        params={"p0": p0, "a": a},
        latent={"u": u, "z1": z1, "z2": z2},
    )
