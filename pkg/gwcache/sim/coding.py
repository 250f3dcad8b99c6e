"""
Bit-level coding of binary description streams.

Fair streams are stored raw. Biased streams go through a static binary
arithmetic coder (64-bit state, 32-bit frequency total) whose bias is part
of the public codebook, so the decoder needs only the code bits, the symbol
count and the bias. Bitstrings are uint8 numpy arrays of 0/1 values.
"""
import struct
from functools import lru_cache

import numpy as np

from ..errors import SimulationError

STATE_SIZE = 64
FREQUENCY_BITS = 32
FREQUENCY_TOTAL = 1 << FREQUENCY_BITS

LENGTH_PREFIX = struct.Struct(">I")


def as_bits(values) -> np.ndarray:
    return np.asarray(values, dtype=np.uint8)


def frequency_of_zero(p: float) -> int:
    """Integer frequency of symbol 0 for a stream with P(1) = p; both symbols keep at least 1."""
    ones = min(max(int(round(p * FREQUENCY_TOTAL)), 1), FREQUENCY_TOTAL - 1)
    return FREQUENCY_TOTAL - ones


class _ArithmeticCoderBase:
    def __init__(self, state_size: int = STATE_SIZE):
        self.state_size = state_size
        full_range = 1 << state_size
        self.mask = full_range - 1
        self.top_mask = full_range >> 1
        self.second_mask = self.top_mask >> 1
        self.low = 0
        self.high = self.mask

    def update(self, f0: int, symbol: int):
        span = self.high - self.low + 1
        split = self.low + f0 * span // FREQUENCY_TOTAL
        if symbol:
            self.low = split
        else:
            self.high = split - 1

        while ((self.low ^ self.high) & self.top_mask) == 0:
            self.shift()
            self.low = (self.low << 1) & self.mask
            self.high = ((self.high << 1) & self.mask) | 1
        while (self.low & ~self.high & self.second_mask) != 0:
            self.underflow()
            self.low = (self.low << 1) & (self.mask >> 1)
            self.high = ((self.high << 1) & (self.mask >> 1)) | self.top_mask | 1

    def shift(self):
        raise NotImplementedError()

    def underflow(self):
        raise NotImplementedError()


class ArithmeticEncoder(_ArithmeticCoderBase):
    def __init__(self, state_size: int = STATE_SIZE):
        super().__init__(state_size)
        self.output: list[int] = []
        self.pending = 0

    def write(self, f0: int, symbol: int):
        self.update(f0, symbol)

    def finish(self) -> np.ndarray:
        # one 1-bit lands inside [low, high] given zero padding at the decoder
        self.output.append(1)
        return as_bits(self.output)

    def shift(self):
        bit = self.low >> (self.state_size - 1)
        self.output.append(bit)
        self.output.extend([bit ^ 1] * self.pending)
        self.pending = 0

    def underflow(self):
        self.pending += 1


class ArithmeticDecoder(_ArithmeticCoderBase):
    def __init__(self, code: np.ndarray, state_size: int = STATE_SIZE):
        super().__init__(state_size)
        self.bits = code.tolist()
        self.position = 0
        self.code = 0
        for _ in range(self.state_size):
            self.code = (self.code << 1) | self.read_code_bit()

    def read(self, f0: int) -> int:
        span = self.high - self.low + 1
        value = ((self.code - self.low + 1) * FREQUENCY_TOTAL - 1) // span
        symbol = 1 if value >= f0 else 0
        self.update(f0, symbol)
        return symbol

    def shift(self):
        self.code = ((self.code << 1) & self.mask) | self.read_code_bit()

    def underflow(self):
        self.code = (self.code & self.top_mask) | ((self.code << 1) & (self.mask >> 1)) | self.read_code_bit()

    def read_code_bit(self) -> int:
        if self.position >= len(self.bits):
            return 0
        bit = self.bits[self.position]
        self.position += 1
        return bit


def arithmetic_encode(bits: np.ndarray, p: float) -> np.ndarray:
    f0 = frequency_of_zero(p)
    encoder = ArithmeticEncoder()
    for bit in as_bits(bits).tolist():
        encoder.write(f0, bit)
    return encoder.finish()


def arithmetic_decode(code: np.ndarray, n: int, p: float) -> np.ndarray:
    f0 = frequency_of_zero(p)
    decoder = ArithmeticDecoder(as_bits(code))
    return as_bits([decoder.read(f0) for _ in range(n)])


def encode_stream(bits: np.ndarray, p: float) -> np.ndarray:
    """
    Description of a Bernoulli(p) bit stream.

    Raises:
        SimulationError: if a deterministic stream (p = 0 or 1) holds the other value.
    """
    bits = as_bits(bits)
    if p == 0.5:
        return bits.copy()
    if p in (0.0, 1.0):
        if np.any(bits != int(p)):
            raise SimulationError(f"Stream with bias {p} holds a bit of the other value.")
        return as_bits([])
    return arithmetic_encode(bits, p)


@lru_cache(maxsize=32)
def _decode_cached(code: bytes, n: int, p: float) -> bytes:
    return arithmetic_decode(np.frombuffer(code, dtype=np.uint8), n, p).tobytes()


def decode_stream(code: np.ndarray, n: int, p: float) -> np.ndarray:
    """Inverse of ``encode_stream`` for a stream of ``n`` symbols."""
    code = as_bits(code)
    if p == 0.5:
        return code[:n].copy()
    if p in (0.0, 1.0):
        return np.full(n, int(p), dtype=np.uint8)
    return np.frombuffer(_decode_cached(code.tobytes(), n, p), dtype=np.uint8).copy()


def pack_bitstring(bits: np.ndarray) -> bytes:
    """4-byte big-endian bit count followed by the bits packed MSB-first."""
    bits = as_bits(bits)
    return LENGTH_PREFIX.pack(len(bits)) + np.packbits(bits).tobytes()


def unpack_bitstring(data: bytes, offset: int = 0) -> tuple[np.ndarray, int]:
    """Reads one length-prefixed bitstring; returns it and the offset just past it."""
    (count,) = LENGTH_PREFIX.unpack_from(data, offset)
    offset += LENGTH_PREFIX.size
    size = (count + 7) // 8
    if size == 0:
        return as_bits([]), offset
    packed = np.frombuffer(data, dtype=np.uint8, count=size, offset=offset)
    return np.unpackbits(packed, count=count), offset + size
