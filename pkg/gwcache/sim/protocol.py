"""
Bit-exact run of the Gray-Wyner / LFU / TC caching scheme.

A library realization is compressed into a common description w0 and two
private descriptions w1, w2. Each receiver caches a prefix of w0 (identical
at both receivers) and a TC placement of the privates, in one of three
regimes set by the whole-bit budget B = floor(n M):

    1. B < L               no w0, TC placement of the privates with budget B
    2. L <= B < |w0| + L   first B - L bits of w0, TC placement with budget L
    3. B >= |w0| + L       all of w0, TC placement with budget B - |w0|

where L is the common (even) private length. Delivery multicasts the
uncached suffix of w0 followed by the TC payload. Receivers decode from
their own cache, the public codebook and the codeword only.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core.achievable import OperatingPoint, r_ach
from ..core.bounds import _check_memory
from ..errors import SimulationError, UnsupportedSourceError, ValidationError
from .coding import as_bits, decode_stream, encode_stream
from .sources import DSBS, SHARED, LibraryRealization, gen_dsbs_wyner, gen_shared_component, shared_realization
from .tc import TcPlacement, TcPlan, padded_length, tc_decode, tc_deliver, tc_place

logger = logging.getLogger(__name__)

DEMANDS = ((1, 1), (1, 2), (2, 1), (2, 2))
RANGE_TOL = 1e-9
MAX_EXHAUSTIVE_N = 8


@dataclass(frozen=True)
class Codebook:
    """Public side of the descriptions: what every receiver knows before delivery."""

    family: str
    n: int
    biases: tuple[float, float, float]
    lengths: tuple[int, int, int]

    @property
    def private_length(self) -> int:
        return padded_length(self.lengths[1], self.lengths[2])

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "biases": list(self.biases),
            "lengths": list(self.lengths),
            "private_length": self.private_length,
        }


@dataclass(frozen=True, eq=False)
class Descriptions:
    codebook: Codebook
    w0: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    lib: LibraryRealization

    def private(self, index: int) -> np.ndarray:
        return self.w1 if index == 1 else self.w2

    @property
    def rates(self) -> tuple[float, float, float]:
        n = self.codebook.n
        return len(self.w0) / n, len(self.w1) / n, len(self.w2) / n

    @property
    def operating_point(self) -> OperatingPoint:
        """(R0, rho) as realized, with rho the padded private length per symbol."""
        n = self.codebook.n
        return OperatingPoint(len(self.w0) / n, self.codebook.private_length / n)

    def to_json(self) -> dict:
        r0, r1, r2 = self.rates
        return {"R0": r0, "R1": r1, "R2": r2, "rho": self.operating_point.rho}


@dataclass(frozen=True)
class Placement:
    """Manifest of one receiver's cache; the two manifests differ only in ``receiver``."""

    receiver: int
    memory: float
    budget: int
    regime: int
    w0_cached: int
    plan: TcPlan
    codebook: Codebook

    def to_json(self) -> dict:
        return {
            "receiver": self.receiver,
            "M": self.memory,
            "budget": self.budget,
            "regime": self.regime,
            "w0_cached": self.w0_cached,
            "tc": self.plan.to_json(),
        }


@dataclass(frozen=True, eq=False)
class CacheContents:
    bits: np.ndarray
    manifest: Placement


@dataclass(frozen=True, eq=False)
class DeliveryTranscript:
    demand: tuple[int, int]
    codeword: np.ndarray
    decoded: tuple[np.ndarray, np.ndarray]
    bits_sent: int
    success: bool

    def to_json(self) -> dict:
        return {"demand": list(self.demand), "bits_sent": self.bits_sent, "success": self.success}


@dataclass(frozen=True, eq=False)
class SimPoint:
    memory: float
    budget: int
    regime: int
    cache_bits: int
    transcripts: list[DeliveryTranscript]
    analytical_rate: float

    @property
    def peak_bits(self) -> int:
        return max(t.bits_sent for t in self.transcripts)

    @property
    def success(self) -> bool:
        return all(t.success for t in self.transcripts)

    def empirical_rate(self, n: int) -> float:
        return self.peak_bits / n

    def to_json(self, n: int) -> dict:
        empirical = self.empirical_rate(n)
        return {
            "M": self.memory,
            "budget": self.budget,
            "regime": self.regime,
            "cache_bits": self.cache_bits,
            "deliveries": [t.to_json() for t in self.transcripts],
            "empirical_rate": empirical,
            "R_ach": self.analytical_rate,
            "deviation": abs(empirical - self.analytical_rate),
            "success": self.success,
        }


@dataclass(frozen=True)
class SourceSpec:
    """Which supported family to draw from, with its parameters."""

    family: str
    p0: float = 0.2
    pv: float = 0.5
    p1: float = 0.5
    p2: float = 0.5

    def __post_init__(self):
        if self.family not in (SHARED, DSBS):
            raise ValidationError(
                f"Unknown source family '{self.family}'.",
                {"family": f"must be one of '{SHARED}', '{DSBS}'"},
            )

    def generate(self, n: int, seed: int) -> LibraryRealization:
        if self.family == DSBS:
            return gen_dsbs_wyner(n, self.p0, seed)
        return gen_shared_component(n, self.pv, self.p1, self.p2, seed)

    def to_json(self) -> dict:
        if self.family == DSBS:
            return {"family": DSBS, "p0": self.p0}
        return {"family": SHARED, "pv": self.pv, "p1": self.p1, "p2": self.p2}


@dataclass(frozen=True, eq=False)
class SimRun:
    source: SourceSpec
    n: int
    seed: int
    descriptions: Descriptions
    points: list[SimPoint] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return all(point.success for point in self.points)

    @property
    def max_deviation(self) -> float:
        return max((abs(p.empirical_rate(self.n) - p.analytical_rate) for p in self.points), default=0.0)

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "n": self.n,
            "seed": self.seed,
            "rates": self.descriptions.to_json(),
            "points": [point.to_json(self.n) for point in self.points],
            "max_deviation": self.max_deviation,
            "success": self.success,
        }


@dataclass(frozen=True)
class VerifyReport:
    passed: bool
    checked: int
    n: int
    budgets: tuple[int, ...]
    counterexample: dict | None = None

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "n": self.n,
            "budgets": list(self.budgets),
            "counterexample": self.counterexample,
        }


def gw_encode(lib: LibraryRealization) -> Descriptions:
    """
    Exact Gray-Wyner descriptions from the latent streams of a realization.

    Raises:
        UnsupportedSourceError: if the realization has no supported latent structure.
    """
    if lib.latent is None or lib.family not in (SHARED, DSBS):
        raise UnsupportedSourceError(
            f"Source family '{lib.family}' has no exactly codable Gray-Wyner descriptions."
        )
    if lib.family == SHARED:
        biases = (lib.params["pv"], lib.params["p1"], lib.params["p2"])
        streams = (lib.latent["v"], lib.latent["x1p"], lib.latent["x2p"])
    else:
        a = lib.params["a"]
        biases = (0.5, a, a)
        streams = (lib.latent["u"], lib.latent["z1"], lib.latent["z2"])
    w0, w1, w2 = (encode_stream(bits, p) for bits, p in zip(streams, biases))
    codebook = Codebook(lib.family, lib.n, biases, (len(w0), len(w1), len(w2)))
    logger.debug("Encoded descriptions of lengths %d, %d, %d.", *codebook.lengths)
    return Descriptions(codebook, w0, w1, w2, lib)


def gw_decode(codebook: Codebook, w0: np.ndarray, wi: np.ndarray, index: int) -> np.ndarray:
    """File ``index`` (1 or 2) from the common and its private description."""
    common = decode_stream(w0, codebook.n, codebook.biases[0])
    own = decode_stream(wi, codebook.n, codebook.biases[index])
    if codebook.family == SHARED:
        return (2 * own + common).astype(np.uint8)
    if codebook.family == DSBS:
        return common ^ own
    raise UnsupportedSourceError(f"Cannot decode source family '{codebook.family}'.")


def memory_budget(n: int, m: float) -> int:
    # round first so that e.g. 0.29 * 100 lands on 29, not 28
    return math.floor(round(n * m, 9))


def cache_encode(desc: Descriptions, m: float) -> tuple[CacheContents, CacheContents]:
    """
    Fills both receiver caches with floor(n M) bits at most.

    Raises:
        ValidationError: if M lies outside [0, R0 + 2 rho] for these descriptions.
        SimulationError: if a cache ends up over budget.
    """
    m = _check_memory(m)
    codebook = desc.codebook
    common = codebook.lengths[0]
    length = codebook.private_length
    top = (common + 2 * length) / codebook.n
    if m > top + RANGE_TOL:
        raise ValidationError(
            f"Memory M={m} exceeds R0 + 2 rho = {top:.6f} for these descriptions.",
            {"M": f"must lie in [0, {top:.6f}]"},
        )
    budget = min(memory_budget(codebook.n, m), common + 2 * length)

    if budget < length:
        regime, cached, private_budget = 1, 0, budget
    elif budget < common + length:
        regime, cached, private_budget = 2, budget - length, length
    else:
        regime, cached, private_budget = 3, common, budget - common

    placement: TcPlacement = tc_place(desc.w1, desc.w2, private_budget)
    caches = []
    for receiver in (1, 2):
        bits = np.concatenate([desc.w0[:cached], placement.caches[receiver - 1]])
        if len(bits) > budget:
            raise SimulationError(f"Receiver {receiver} cache holds {len(bits)} bits over a budget of {budget}.")
        manifest = Placement(receiver, m, budget, regime, cached, placement.plan, codebook)
        caches.append(CacheContents(bits, manifest))
    return caches[0], caches[1]


def receiver_decode(cache: CacheContents, codeword: np.ndarray, demand: tuple[int, int]) -> np.ndarray:
    """The file a receiver asked for, from its cache, its manifest and the codeword."""
    manifest = cache.manifest
    codebook = manifest.codebook
    suffix = codebook.lengths[0] - manifest.w0_cached
    w0 = np.concatenate([cache.bits[:manifest.w0_cached], codeword[:suffix]])
    padded = tc_decode(
        manifest.plan,
        cache.bits[manifest.w0_cached:],
        codeword[suffix:],
        demand,
        manifest.receiver - 1,
    )
    wanted = demand[manifest.receiver - 1]
    return gw_decode(codebook, w0, padded[:codebook.lengths[wanted]], wanted)


def _check_demand(demand) -> tuple[int, int]:
    demand = tuple(int(d) for d in demand)
    if len(demand) != 2 or any(d not in (1, 2) for d in demand):
        raise ValidationError(f"Demand {demand} is not a pair over {{1, 2}}.", {"demand": "must be in {1,2}^2"})
    return demand


def multicast_encode(desc: Descriptions, caches: tuple[CacheContents, CacheContents], demand) -> DeliveryTranscript:
    """Uncached w0 suffix followed by the TC payload; both receivers decode it."""
    demand = _check_demand(demand)
    manifest = caches[0].manifest
    placement = tc_place(desc.w1, desc.w2, manifest.plan.budget)
    codeword = np.concatenate([desc.w0[manifest.w0_cached:], tc_deliver(placement, demand)])
    decoded = tuple(receiver_decode(cache, codeword, demand) for cache in caches)
    success = all(
        np.array_equal(decoded[k], desc.lib.file(demand[k])) for k in (0, 1)
    )
    return DeliveryTranscript(demand, codeword, decoded, len(codeword), success)


def _check_grid(memories) -> list[float]:
    memories = [_check_memory(m) for m in memories]
    if not memories:
        raise ValidationError("Memory grid is empty.", {"grid": "must hold at least one value"})
    return memories


def run_experiment(source: SourceSpec, memories, n: int, seed: int) -> SimRun:
    """
    Generates one realization, then places and delivers all four demands at every M.

    The analytical rate of each point is r_ach at the realized operating point.
    """
    memories = _check_grid(memories)
    lib = source.generate(n, seed)
    desc = gw_encode(lib)
    point = desc.operating_point
    logger.info("Realized operating point R0=%.6f rho=%.6f at n=%d.", point.r0, point.rho, n)

    run = SimRun(source, n, seed, desc)
    for m in memories:
        caches = cache_encode(desc, m)
        transcripts = [multicast_encode(desc, caches, demand) for demand in DEMANDS]
        manifest = caches[0].manifest
        sim_point = SimPoint(
            memory=m,
            budget=manifest.budget,
            regime=manifest.regime,
            cache_bits=max(len(cache.bits) for cache in caches),
            transcripts=transcripts,
            analytical_rate=r_ach(point, m),
        )
        if not sim_point.success:
            logger.error("Decoding failed at M=%.6f.", m)
        logger.info(
            "M=%.4f: peak rate %.6f vs %.6f.", m, sim_point.empirical_rate(n), sim_point.analytical_rate
        )
        run.points.append(sim_point)
    return run


def _realization_from_index(index: int, n: int) -> LibraryRealization:
    bits = ((index >> np.arange(3 * n)) & 1).astype(np.uint8)
    return shared_realization(bits[:n], bits[n:2 * n], bits[2 * n:])


def exhaustive_corners(n_small: int) -> tuple[int, ...]:
    """Cache budgets in bits where the scheme changes regime or TC corner, for fair bits of length n."""
    length = padded_length(n_small, n_small)
    return (0, length // 2, length, n_small + length, n_small + 2 * length)


def exhaustive_verify(
    n_small: int = 4,
    budgets=None,
    mutate: Callable[[tuple[CacheContents, CacheContents]], tuple[CacheContents, CacheContents]] | None = None,
) -> VerifyReport:
    """
    Runs every fair-bit shared-component realization of length ``n_small``
    through every budget (in bits) and all four demands.

    ``budgets`` defaults to every whole-bit budget from 0 to n + 2L, the
    top of the range for fair bits (|w0| = n, private length L). That covers
    each corner 0, L/2, L, n + L, n + 2L and every memory-sharing budget
    between them. ``mutate`` may tamper with the caches before delivery; the
    first decode failure is returned as a counterexample.
    """
    if not 1 <= n_small <= MAX_EXHAUSTIVE_N:
        raise ValidationError(
            f"Exhaustive verification needs 1 <= n <= {MAX_EXHAUSTIVE_N}, but got {n_small}.",
            {"n": f"must lie in [1, {MAX_EXHAUSTIVE_N}]"},
        )
    if budgets is None:
        budgets = range(exhaustive_corners(n_small)[-1] + 1)
    budgets = tuple(int(b) for b in budgets)

    checked = 0
    for index in range(1 << (3 * n_small)):
        desc = gw_encode(_realization_from_index(index, n_small))
        for budget in budgets:
            caches = cache_encode(desc, budget / n_small)
            if mutate is not None:
                caches = mutate(caches)
            for demand in DEMANDS:
                checked += 1
                if not multicast_encode(desc, caches, demand).success:
                    counterexample = {"realization": index, "budget": budget, "demand": list(demand)}
                    logger.warning("Exhaustive check failed: %s", counterexample)
                    return VerifyReport(False, checked, n_small, budgets, counterexample)
    logger.info("Exhaustive check passed %d deliveries at n=%d.", checked, n_small)
    return VerifyReport(True, checked, n_small, budgets)
