"""Bloom filter over a vector of ``k`` random-oracle hashes."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from amqcheck.amq_core import Amq
from amqcheck.analytic import BloomParams, bloom_false_positive
from amqcheck.hashing import VectorHash

MAGIC = b"AMQB1"


@dataclass(frozen=True)
class BloomState:
    """``m`` bits packed into one integer; bit ``i`` is ``(bits >> i) & 1``."""

    m: int
    bits: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"Bloom filter needs m >= 1, got {self.m}")
        if self.bits < 0 or self.bits >> self.m:
            raise ValueError("bit pattern wider than m")

    def as_list(self) -> list[bool]:
        return [bool((self.bits >> i) & 1) for i in range(self.m)]

    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def raised(self) -> set[int]:
        return {i for i in range(self.m) if (self.bits >> i) & 1}

    def __repr__(self):
        return "BloomState(" + "".join("1" if b else "0" for b in self.as_list()) + ")"


def _check_index(state: BloomState, i: int) -> None:
    if not 0 <= i < state.m:
        raise IndexError(f"bit index {i} outside [0, {state.m})")


def bf_new(m: int) -> BloomState:
    return BloomState(m)


def bf_from_bits(bits: Iterable[bool]) -> BloomState:
    bits = list(bits)
    return BloomState(len(bits), sum(1 << i for i, b in enumerate(bits) if b))


def bf_get_int(state: BloomState, i: int) -> bool:
    _check_index(state, i)
    return bool((state.bits >> i) & 1)


def bf_add_int(state: BloomState, indices: Iterable[int]) -> BloomState:
    bits = state.bits
    for i in indices:
        _check_index(state, i)
        bits |= 1 << i
    if bits == state.bits:
        return state
    return BloomState(state.m, bits)


def bf_query_int(state: BloomState, indices: Iterable[int]) -> bool:
    """True iff every index is set; vacuously true for no indices."""
    result = True
    for i in indices:
        _check_index(state, i)
        if not (state.bits >> i) & 1:
            result = False
    return result


def encode(state: BloomState) -> bytes:
    nbytes = (state.m + 7) // 8
    return MAGIC + struct.pack("<I", state.m) + state.bits.to_bytes(nbytes, "little")


def decode(data: bytes, offset: int = 0) -> tuple[BloomState, int]:
    if data[offset : offset + 5] != MAGIC:
        raise ValueError("not an AMQB1 Bloom state")
    (m,) = struct.unpack_from("<I", data, offset + 5)
    start = offset + 9
    nbytes = (m + 7) // 8
    if len(data) < start + nbytes:
        raise ValueError("truncated AMQB1 payload")
    bits = int.from_bytes(data[start : start + nbytes], "little")
    return BloomState(m, bits), start + nbytes


class BloomFilter(Amq):
    name = "bloom"

    def __init__(self, m: int, k: int):
        self.bloom_params = BloomParams(m, k)
        self.m = m
        self.k = k
        self.hash = VectorHash(m, k)

    def new(self) -> BloomState:
        return bf_new(self.m)

    def add_internal(self, state, output):
        return bf_add_int(state, output)

    def query_internal(self, state, output) -> bool:
        return bf_query_int(state, output)

    def available_capacity(self, state, n: int) -> bool:
        return True

    def false_positive(self, l: int) -> Fraction:
        return bloom_false_positive(self.bloom_params, l)

    def params(self) -> dict:
        return {"m": self.m, "k": self.k}

    def encode(self, state) -> bytes:
        return encode(state)
