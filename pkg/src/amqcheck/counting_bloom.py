"""Counting Bloom filter: bounded counters in place of bits.

Counters live in ``[0, bound]``. Inserting past the bound raises
``CounterSaturation`` and removing from a zero counter raises
``UnderflowRemoval``; nothing is ever clamped, since a clamped counter
would let a later removal clear a position another key still needs.
"""

from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from amqcheck.amq_core import Amq, AmqMapWitness, amq_add
from amqcheck.analytic import BloomParams, bloom_false_positive
from amqcheck.bloom import BloomFilter, BloomState
from amqcheck.errors import CounterSaturation, UnderflowRemoval
from amqcheck.hashing import VectorHash

MAGIC = b"AMQC1"


@dataclass(frozen=True)
class CountingState:
    counters: tuple[int, ...]
    bound: int

    def __post_init__(self):
        if not self.counters:
            raise ValueError("counting filter needs m >= 1")
        if self.bound < 1:
            raise ValueError(f"counter bound must be >= 1, got {self.bound}")
        if any(c < 0 or c > self.bound for c in self.counters):
            raise ValueError(f"counter outside [0, {self.bound}]")

    @property
    def m(self) -> int:
        return len(self.counters)


def _check_indices(state: CountingState, indices) -> Counter:
    counts = Counter(indices)
    for i in counts:
        if not 0 <= i < state.m:
            raise IndexError(f"counter index {i} outside [0, {state.m})")
    return counts


def cf_new(m: int, bound: int) -> CountingState:
    if m < 1:
        raise ValueError(f"counting filter needs m >= 1, got {m}")
    return CountingState((0,) * m, bound)


def cf_add_int(state: CountingState, indices: Iterable[int]) -> CountingState:
    counts = _check_indices(state, indices)
    counters = list(state.counters)
    for i, n in counts.items():
        if counters[i] + n > state.bound:
            raise CounterSaturation(
                f"counter {i} at {counters[i]} cannot take {n} more (bound {state.bound})"
            )
        counters[i] += n
    return CountingState(tuple(counters), state.bound)


def cf_remove_int(state: CountingState, indices: Iterable[int]) -> CountingState:
    counts = _check_indices(state, indices)
    counters = list(state.counters)
    for i, n in counts.items():
        if counters[i] < n:
            raise UnderflowRemoval(f"counter {i} at {counters[i]} cannot be decremented {n} times")
        counters[i] -= n
    return CountingState(tuple(counters), state.bound)


def cf_query_int(state: CountingState, indices: Iterable[int]) -> bool:
    counts = _check_indices(state, indices)
    return all(state.counters[i] > 0 for i in counts)


def cf_available_capacity(state: CountingState, n: int, k: int) -> bool:
    """Every counter has room for ``n`` more inserts of ``k`` increments each."""
    headroom = state.bound - k * n
    return all(c <= headroom for c in state.counters)


def cf_counter_sum(state: CountingState) -> int:
    return sum(state.counters)


def cf_to_bloom(state: CountingState) -> BloomState:
    bits = 0
    for i, c in enumerate(state.counters):
        if c > 0:
            bits |= 1 << i
    return BloomState(state.m, bits)


def counter_width(bound: int) -> int:
    return bound.bit_length()


def encode(state: CountingState) -> bytes:
    """``AMQC1``, u32 m, u32 bound, then counters packed LSB-first at
    ``bound.bit_length()`` bits each."""
    w = counter_width(state.bound)
    packed = 0
    for i, c in enumerate(state.counters):
        packed |= c << (i * w)
    nbytes = (state.m * w + 7) // 8
    return MAGIC + struct.pack("<II", state.m, state.bound) + packed.to_bytes(nbytes, "little")


def decode(data: bytes, offset: int = 0) -> tuple[CountingState, int]:
    if data[offset : offset + 5] != MAGIC:
        raise ValueError("not an AMQC1 counting state")
    m, bound = struct.unpack_from("<II", data, offset + 5)
    w = counter_width(bound)
    start = offset + 13
    nbytes = (m * w + 7) // 8
    if len(data) < start + nbytes:
        raise ValueError("truncated AMQC1 payload")
    packed = int.from_bytes(data[start : start + nbytes], "little")
    mask = (1 << w) - 1
    counters = tuple((packed >> (i * w)) & mask for i in range(m))
    return CountingState(counters, bound), start + nbytes


class CountingBloomFilter(Amq):
    name = "counting"

    def __init__(self, m: int, k: int, bound: int):
        self.bloom_params = BloomParams(m, k)
        if bound < 1:
            raise ValueError(f"counter bound must be >= 1, got {bound}")
        self.m = m
        self.k = k
        self.bound = bound
        self.hash = VectorHash(m, k)

    def new(self) -> CountingState:
        return cf_new(self.m, self.bound)

    def add_internal(self, state, output):
        return cf_add_int(state, output)

    def query_internal(self, state, output) -> bool:
        return cf_query_int(state, output)

    def available_capacity(self, state, n: int) -> bool:
        return cf_available_capacity(state, n, self.k)

    def false_positive(self, l: int) -> Fraction:
        # same observable behaviour as the Bloom filter it maps onto
        return bloom_false_positive(self.bloom_params, l)

    def params(self) -> dict:
        return {"m": self.m, "k": self.k, "bound": self.bound}

    def encode(self, state) -> bytes:
        return encode(state)

    def to_bloom_witness(self) -> AmqMapWitness:
        return AmqMapWitness(self, BloomFilter(self.m, self.k), cf_to_bloom, name="counting->bloom")


def cf_remove(cf: CountingBloomFilter, key: int, layer, state, rng):
    """Remove a key the caller asserts was inserted earlier.

    The key is hashed through the layer (consistently, if it was inserted)
    and its counters decremented. Inserted keys are not tracked.
    """
    layer, out = cf.hash.hash(key, layer, rng)
    return layer, cf_remove_int(state, out)


def cf_add(cf: CountingBloomFilter, key: int, layer, state, rng):
    return amq_add(cf, key, layer, state, rng)
