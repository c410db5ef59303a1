"""Blocked AMQ: ``blocks`` independent copies of an inner AMQ behind a
multiplexed hash.

The combinator is generic over the inner ``Amq``; Blocked Bloom, Counting
Blocked Bloom and Blocked Quotient filters are just ``BlockedAmq`` over the
respective inner instance.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from amqcheck import bloom, counting_bloom, quotient
from amqcheck.amq_core import Amq, AmqMapWitness
from amqcheck.analytic import blocked_false_positive
from amqcheck.hashing import MultiplexedHashKind

MAGIC = b"AMQK1"


@dataclass(frozen=True)
class BlockedState:
    blocks: tuple


def _check_block(state: BlockedState, block: int) -> None:
    if not 0 <= block < len(state.blocks):
        raise IndexError(f"block {block} outside [0, {len(state.blocks)})")


def blocked_new(blocks: int, inner: Amq) -> BlockedState:
    if blocks < 1:
        raise ValueError(f"blocks must be >= 1, got {blocks}")
    return BlockedState(tuple(inner.new() for _ in range(blocks)))


def blocked_add_int(inner: Amq, state: BlockedState, output) -> BlockedState:
    block, inner_out = output
    _check_block(state, block)
    updated = inner.add_internal(state.blocks[block], inner_out)
    return BlockedState(state.blocks[:block] + (updated,) + state.blocks[block + 1 :])


def blocked_query_int(inner: Amq, state: BlockedState, output) -> bool:
    block, inner_out = output
    _check_block(state, block)
    return inner.query_internal(state.blocks[block], inner_out)


def blocked_available_capacity(inner: Amq, state: BlockedState, n: int) -> bool:
    # routing is random, so all n inserts may land in the same block
    return all(inner.available_capacity(s, n) for s in state.blocks)


_DECODERS = {
    bloom.MAGIC: bloom.decode,
    counting_bloom.MAGIC: counting_bloom.decode,
    quotient.MAGIC: quotient.decode,
}


def encode(inner: Amq, state: BlockedState) -> bytes:
    """``AMQK1``, u32 block count, then each block's own encoding."""
    return MAGIC + struct.pack("<I", len(state.blocks)) + b"".join(inner.encode(s) for s in state.blocks)


def decode(data: bytes, offset: int = 0) -> tuple[BlockedState, int]:
    if data[offset : offset + 5] != MAGIC:
        raise ValueError("not an AMQK1 blocked state")
    (n,) = struct.unpack_from("<I", data, offset + 5)
    offset += 9
    blocks = []
    for _ in range(n):
        magic = bytes(data[offset : offset + 5])
        if magic not in _DECODERS:
            raise ValueError(f"unknown inner state header {magic!r}")
        s, offset = _DECODERS[magic](data, offset)
        blocks.append(s)
    return BlockedState(tuple(blocks)), offset


class BlockedAmq(Amq):
    def __init__(self, blocks: int, inner: Amq):
        if blocks < 1:
            raise ValueError(f"blocks must be >= 1, got {blocks}")
        self.blocks = blocks
        self.inner = inner
        self.hash = MultiplexedHashKind(blocks, inner.hash)
        self.name = f"blocked-{inner.name}"
        self._inner_fp = lru_cache(maxsize=None)(inner.false_positive)

    def new(self) -> BlockedState:
        return blocked_new(self.blocks, self.inner)

    def add_internal(self, state, output):
        return blocked_add_int(self.inner, state, output)

    def query_internal(self, state, output) -> bool:
        return blocked_query_int(self.inner, state, output)

    def available_capacity(self, state, n: int) -> bool:
        return blocked_available_capacity(self.inner, state, n)

    def false_positive(self, l: int) -> Fraction:
        return blocked_false_positive(self.blocks, l, self._inner_fp)

    def params(self) -> dict:
        return {"blocks": self.blocks, **self.inner.params()}

    def encode(self, state) -> bytes:
        return encode(self.inner, state)

    def single_block_witness(self) -> AmqMapWitness:
        """Maps a one-block state to its only inner state."""
        if self.blocks != 1:
            raise ValueError("only defined for a single block")
        return AmqMapWitness(self, self.inner, lambda s: s.blocks[0], name="blocked(1)->inner")


def blocked_bloom(blocks: int, m: int, k: int) -> BlockedAmq:
    return BlockedAmq(blocks, bloom.BloomFilter(m, k))


def blocked_counting(blocks: int, m: int, k: int, bound: int) -> BlockedAmq:
    return BlockedAmq(blocks, counting_bloom.CountingBloomFilter(m, k, bound))


def blocked_quotient(blocks: int, q: int, r: int) -> BlockedAmq:
    return BlockedAmq(blocks, quotient.QuotientFilter(q, r))
