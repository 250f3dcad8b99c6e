"""
Two-user / two-file coded caching of the private descriptions.

Four corner schemes, indexed by cache bits per private-description bit:

    corner  cache at receiver k          mixed demand       same-file demand
    0       nothing                      D1 | D2            D
    1/2     A_k xor B_k                  D2[0] | D1[1]      D
    1       A_k | B_k                    D1[1] xor D2[0]    D[0] xor D[1]
    2       both files                   nothing            nothing

A, B are the two (padded) private descriptions, [0] / [1] their halves, and
D1, D2 the descriptions requested by receivers 1 and 2. Budgets between
corners are met by memory sharing: the first ``split`` bits run the lower
corner and the rest the upper one.
"""
from dataclasses import dataclass
from itertools import pairwise

import numpy as np

from ..errors import ValidationError
from .coding import as_bits

# corners in half-bits of cache per description bit
CORNERS = (0, 1, 2, 4)


@dataclass(frozen=True)
class TcPlan:
    length: int
    budget: int
    low: int
    high: int
    split: int

    @property
    def blocks(self) -> list[tuple[int, int, int]]:
        """(start, stop, corner) for the two memory-shared sub-blocks."""
        return [(0, self.split, self.low), (self.split, self.length, self.high)]

    @property
    def cache_bits(self) -> int:
        return sum(cache_size(corner, stop - start) for start, stop, corner in self.blocks)

    def to_json(self) -> dict:
        return {
            "length": self.length,
            "budget": self.budget,
            "corners": [self.low / 2, self.high / 2],
            "split": self.split,
        }


@dataclass(frozen=True, eq=False)
class TcPlacement:
    plan: TcPlan
    files: tuple[np.ndarray, np.ndarray]
    caches: tuple[np.ndarray, np.ndarray]


def padded_length(*lengths: int) -> int:
    longest = max(lengths)
    return longest + longest % 2


def pad(bits: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.uint8)
    out[:len(bits)] = bits
    return out


def cache_size(corner: int, length: int) -> int:
    return corner * length // 2


def payload_size(corner: int, length: int, same: bool) -> int:
    if corner == 4:
        return 0
    if corner == 2:
        return length // 2
    if corner == 1 or same:
        return length
    return 2 * length


def tc_plan(length: int, budget: int) -> TcPlan:
    """
    Memory-sharing plan for private descriptions of ``length`` bits (even).

    Raises:
        ValidationError: if the budget lies outside [0, 2 * length].
    """
    if length % 2:
        raise ValidationError(f"Private length {length} must be even.", {"length": "must be even"})
    if budget < 0 or budget > 2 * length:
        raise ValidationError(
            f"TC budget {budget} is outside [0, {2 * length}].",
            {"budget": f"must lie in [0, {2 * length}]"},
        )
    if length == 0:
        return TcPlan(0, budget, 0, 0, 0)
    for low, high in pairwise(CORNERS):
        if 2 * budget <= high * length:
            break
    # smallest even split keeping low*split + high*(length-split) within budget
    numerator = high * length - 2 * budget
    split = -(-numerator // (high - low))
    split = min(max(split + split % 2, 0), length)
    return TcPlan(length, budget, low, high, split)


def _halves(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = len(block) // 2
    return block[:half], block[half:]


def _cache_block(a: np.ndarray, b: np.ndarray, corner: int, receiver: int) -> np.ndarray:
    if corner == 0:
        return as_bits([])
    if corner == 4:
        return np.concatenate([a, b])
    part_a, part_b = _halves(a)[receiver], _halves(b)[receiver]
    if corner == 1:
        return part_a ^ part_b
    return np.concatenate([part_a, part_b])


def _deliver_block(files: tuple[np.ndarray, np.ndarray], corner: int, demand: tuple[int, int]) -> np.ndarray:
    want1, want2 = files[demand[0] - 1], files[demand[1] - 1]
    if corner == 4:
        return as_bits([])
    if demand[0] == demand[1]:
        if corner in (0, 1):
            return want1.copy()
        first, second = _halves(want1)
        return first ^ second
    if corner == 0:
        return np.concatenate([want1, want2])
    if corner == 1:
        return np.concatenate([_halves(want2)[0], _halves(want1)[1]])
    return _halves(want1)[1] ^ _halves(want2)[0]


def _decode_block(cached: np.ndarray, payload: np.ndarray, corner: int, demand: tuple[int, int],
                  receiver: int, length: int) -> np.ndarray:
    wanted = demand[receiver]
    half = length // 2
    if corner == 4:
        return cached[:length] if wanted == 1 else cached[length:]

    if demand[0] == demand[1]:
        if corner in (0, 1):
            return payload
        own = cached[:half] if wanted == 1 else cached[half:]
        missing = payload ^ own
        return np.concatenate([own, missing] if receiver == 0 else [missing, own])

    if corner == 0:
        return payload[:length] if receiver == 0 else payload[length:]
    if corner == 1:
        first, second = payload[:half], payload[half:]
        if receiver == 0:
            return np.concatenate([cached ^ first, second])
        return np.concatenate([first, cached ^ second])
    mine = cached[:half] if wanted == 1 else cached[half:]
    theirs = cached[half:] if wanted == 1 else cached[:half]
    missing = payload ^ theirs
    return np.concatenate([mine, missing] if receiver == 0 else [missing, mine])


def tc_place(w1: np.ndarray, w2: np.ndarray, budget: int) -> TcPlacement:
    """Pads both descriptions to a common even length and fills each receiver's budget."""
    length = padded_length(len(w1), len(w2))
    plan = tc_plan(length, budget)
    files = (pad(w1, length), pad(w2, length))
    caches = tuple(
        np.concatenate([as_bits([])] + [
            _cache_block(files[0][start:stop], files[1][start:stop], corner, receiver)
            for start, stop, corner in plan.blocks
        ])
        for receiver in (0, 1)
    )
    return TcPlacement(plan, files, caches)


def tc_deliver(placement: TcPlacement, demand: tuple[int, int]) -> np.ndarray:
    a, b = placement.files
    return np.concatenate([as_bits([])] + [
        _deliver_block((a[start:stop], b[start:stop]), corner, demand)
        for start, stop, corner in placement.plan.blocks
    ])


def tc_decode(plan: TcPlan, cached: np.ndarray, payload: np.ndarray, demand: tuple[int, int],
              receiver: int) -> np.ndarray:
    """Padded description wanted by ``receiver`` (0 or 1), from its cache part and the payload."""
    same = demand[0] == demand[1]
    parts = []
    cache_at = payload_at = 0
    for start, stop, corner in plan.blocks:
        length = stop - start
        cache_end = cache_at + cache_size(corner, length)
        payload_end = payload_at + payload_size(corner, length, same)
        parts.append(_decode_block(
            cached[cache_at:cache_end], payload[payload_at:payload_end],
            corner, demand, receiver, length,
        ))
        cache_at, payload_at = cache_end, payload_end
    return np.concatenate([as_bits([])] + parts)
