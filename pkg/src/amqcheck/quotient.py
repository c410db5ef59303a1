"""Abstract quotient filter.

One ``p``-bit hash output is split into a ``q``-bit quotient, which picks a
bucket, and an ``r``-bit remainder, which is stored in that bucket. Buckets
are unbounded multisets, so the state is a hash table rather than the
packed slot array of a production quotient filter.
"""

from __future__ import annotations

import bisect
import struct
from dataclasses import dataclass
from fractions import Fraction

from amqcheck.amq_core import Amq
from amqcheck.analytic import QuotientParams, quotient_false_positive
from amqcheck.hashing import SingleHash

MAGIC = b"AMQQ1"


@dataclass(frozen=True)
class QuotientState:
    q: int
    r: int
    buckets: tuple[tuple[int, ...], ...]  # each bucket a sorted multiset

    def __post_init__(self):
        if len(self.buckets) != 1 << self.q:
            raise ValueError(f"expected {1 << self.q} buckets, got {len(self.buckets)}")
        limit = 1 << self.r
        for b in self.buckets:
            if any(not 0 <= x < limit for x in b):
                raise ValueError(f"remainder outside [0, {limit})")

    @classmethod
    def _trusted(cls, q: int, r: int, buckets: tuple) -> "QuotientState":
        # skips validation; callers already hold a valid bucket and remainder
        obj = object.__new__(cls)
        object.__setattr__(obj, "q", q)
        object.__setattr__(obj, "r", r)
        object.__setattr__(obj, "buckets", buckets)
        return obj

    def stored(self) -> int:
        return sum(len(b) for b in self.buckets)


def quotient_split(output: int, q: int, r: int) -> tuple[int, int]:
    """Upper ``q`` bits and lower ``r`` bits of a ``q + r``-bit output."""
    if not 0 <= output < 1 << (q + r):
        raise ValueError(f"output {output} outside [0, 2^{q + r})")
    return output >> r, output & ((1 << r) - 1)


def qf_new(q: int, r: int) -> QuotientState:
    QuotientParams(q, r)
    return QuotientState(q, r, ((),) * (1 << q))


def qf_add_int(state: QuotientState, output: int) -> QuotientState:
    quot, rem = quotient_split(output, state.q, state.r)
    bucket = list(state.buckets[quot])
    bisect.insort(bucket, rem)
    buckets = state.buckets[:quot] + (tuple(bucket),) + state.buckets[quot + 1 :]
    return QuotientState._trusted(state.q, state.r, buckets)


def qf_query_int(state: QuotientState, output: int) -> bool:
    quot, rem = quotient_split(output, state.q, state.r)
    return rem in state.buckets[quot]


def encode(state: QuotientState) -> bytes:
    """``AMQQ1``, u8 q, u8 r, then per bucket a u32 count followed by that
    many u64 remainders in ascending order."""
    if state.r > 64:
        raise ValueError("serialization supports r <= 64")
    parts = [MAGIC, struct.pack("<BB", state.q, state.r)]
    for b in state.buckets:
        parts.append(struct.pack(f"<I{len(b)}Q", len(b), *b))
    return b"".join(parts)


def decode(data: bytes, offset: int = 0) -> tuple[QuotientState, int]:
    if data[offset : offset + 5] != MAGIC:
        raise ValueError("not an AMQQ1 quotient state")
    q, r = struct.unpack_from("<BB", data, offset + 5)
    offset += 7
    buckets = []
    for _ in range(1 << q):
        (n,) = struct.unpack_from("<I", data, offset)
        offset += 4
        buckets.append(tuple(struct.unpack_from(f"<{n}Q", data, offset)))
        offset += 8 * n
    return QuotientState(q, r, tuple(buckets)), offset


class QuotientFilter(Amq):
    name = "quotient"

    def __init__(self, q: int, r: int):
        self.qparams = QuotientParams(q, r)
        self.q = q
        self.r = r
        self.hash = SingleHash(1 << (q + r))

    @property
    def p(self) -> int:
        return self.q + self.r

    def new(self) -> QuotientState:
        return qf_new(self.q, self.r)

    def add_internal(self, state, output):
        return qf_add_int(state, output)

    def query_internal(self, state, output) -> bool:
        return qf_query_int(state, output)

    def available_capacity(self, state, n: int) -> bool:
        return True

    def false_positive(self, l: int) -> Fraction:
        return quotient_false_positive(self.qparams, l)

    def params(self) -> dict:
        return {"q": self.q, "r": self.r}

    def encode(self, state) -> bytes:
        return encode(state)
