"""Random-oracle hashing.

A hash state is a finite map from keys to outputs. Hashing a key that is
already in the map returns the recorded output and draws nothing; an
unseen key gets a fresh uniform draw which is then recorded. States are
persistent: every operation returns a new state and leaves its input
alone.

Three hash kinds are provided, each with ``new``/``hash``/``forget``:

* ``SingleHash`` - one oracle over ``[0, d)`` (quotient filters)
* ``VectorHash`` - ``k`` independent oracles over ``[0, m)`` (Bloom variants)
* ``MultiplexedHashKind`` - a meta oracle picking one of ``blocks`` blocks,
  composed with that block's own inner hash (blocked filters)
"""

from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, Protocol

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix(seed: int, stream: int) -> int:
    """Derive an independent stream id from a seed and a trial index."""
    return splitmix64(splitmix64(seed & MASK64) ^ ((stream * _GOLDEN) & MASK64))


class DrawSource(Protocol):
    def draw(self, d: int) -> int: ...


class Rng:
    """Counter-based generator: draw ``n`` depends only on ``(seed, n)``.

    ``draw(1)`` returns 0 without advancing the counter, so structures
    whose only choice is forced (a single block, say) consume the same
    randomness as their degenerate counterparts.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & MASK64
        self.counter = counter

    @classmethod
    def for_trial(cls, seed: int, trial: int) -> "Rng":
        return cls(mix(seed, trial))

    def next_u64(self) -> int:
        self.counter += 1
        return splitmix64((self.seed + self.counter * _GOLDEN) & MASK64)

    def draw(self, d: int) -> int:
        """Uniform integer in ``[0, d)`` by rejection sampling."""
        if d < 1:
            raise ValueError(f"domain size must be >= 1, got {d}")
        if d == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % d)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % d

    def __repr__(self):
        return f"Rng(seed={self.seed:#x}, counter={self.counter})"


class HashState:
    """Persistent finite map from 64-bit keys to outputs in ``[0, domain_size)``."""

    __slots__ = ("domain_size", "_map", "_hash")

    def __init__(self, domain_size: int, mapping: dict[int, int] | None = None):
        if domain_size < 1:
            raise ValueError(f"domain size must be >= 1, got {domain_size}")
        self.domain_size = domain_size
        self._map = dict(mapping) if mapping else {}
        for key, out in self._map.items():
            if not 0 <= out < domain_size:
                raise ValueError(f"output {out} for key {key} outside [0, {domain_size})")
        self._hash = None

    @classmethod
    def _trusted(cls, domain_size: int, mapping: dict[int, int]) -> "HashState":
        obj = cls.__new__(cls)
        obj.domain_size = domain_size
        obj._map = mapping
        obj._hash = None
        return obj

    def lookup(self, key: int) -> int | None:
        return self._map.get(key)

    def with_entry(self, key: int, output: int) -> "HashState":
        mapping = dict(self._map)
        mapping[key] = output
        return HashState._trusted(self.domain_size, mapping)

    def without(self, keys: Iterable[int]) -> "HashState":
        drop = [k for k in keys if k in self._map]
        if not drop:
            return self
        mapping = dict(self._map)
        for k in drop:
            del mapping[k]
        return HashState._trusted(self.domain_size, mapping)

    def items(self) -> list[tuple[int, int]]:
        return sorted(self._map.items())

    def __len__(self):
        return len(self._map)

    def __contains__(self, key):
        return key in self._map

    def __eq__(self, other):
        if not isinstance(other, HashState):
            return NotImplemented
        return self.domain_size == other.domain_size and self._map == other._map

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.domain_size, frozenset(self._map.items())))
        return self._hash

    def __repr__(self):
        return f"HashState(d={self.domain_size}, {dict(self.items())})"


def hash_key(key: int, state: HashState, rng: DrawSource) -> tuple[HashState, int]:
    found = state.lookup(key)
    if found is not None:
        return state, found
    out = rng.draw(state.domain_size)
    return state.with_entry(key, out), out


def contains(state: HashState, key: int, output: int) -> bool:
    return state.lookup(key) == output


def unseen(state: HashState, key: int) -> bool:
    return key not in state


@dataclass(frozen=True)
class HashVector:
    states: tuple[HashState, ...]

    def __post_init__(self):
        if not self.states:
            raise ValueError("a hash vector needs at least one state")
        if len({s.domain_size for s in self.states}) != 1:
            raise ValueError("hash vector states must share one domain size")

    @classmethod
    def fresh(cls, m: int, k: int) -> "HashVector":
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        return cls(tuple(HashState(m) for _ in range(k)))

    @property
    def k(self) -> int:
        return len(self.states)

    @property
    def domain_size(self) -> int:
        return self.states[0].domain_size

    def without(self, keys: Iterable[int]) -> "HashVector":
        keys = tuple(keys)
        return HashVector(tuple(s.without(keys) for s in self.states))


def hash_vec(key: int, hv: HashVector, rng: DrawSource) -> tuple[HashVector, tuple[int, ...]]:
    outs = []
    states = []
    changed = False
    for s in hv.states:
        s2, o = hash_key(key, s, rng)
        changed |= s2 is not s
        states.append(s2)
        outs.append(o)
    return (HashVector(tuple(states)) if changed else hv), tuple(outs)


def vec_contains(hv: HashVector, key: int, outputs: tuple[int, ...]) -> bool:
    return len(outputs) == hv.k and all(contains(s, key, o) for s, o in zip(hv.states, outputs))


def vec_unseen(hv: HashVector, key: int) -> bool:
    return all(unseen(s, key) for s in hv.states)


@dataclass(frozen=True)
class MultiplexedHash:
    meta: HashState
    inner: tuple

    def __post_init__(self):
        if len(self.inner) != self.meta.domain_size:
            raise ValueError(
                f"{len(self.inner)} inner states for a meta hash over {self.meta.domain_size} blocks"
            )

    @property
    def blocks(self) -> int:
        return self.meta.domain_size


# --- hash kinds: the interface filters program against -----------------


class SingleHash:
    """One random oracle over ``[0, d)``; outputs are plain ints."""

    def __init__(self, d: int):
        if d < 1:
            raise ValueError(f"domain size must be >= 1, got {d}")
        self.d = d

    def new(self) -> HashState:
        return HashState(self.d)

    def hash(self, key, state, rng):
        return hash_key(key, state, rng)

    def contains(self, state, key, output) -> bool:
        return contains(state, key, output)

    def unseen(self, state, key) -> bool:
        return unseen(state, key)

    def forget(self, state, keys):
        return state.without(keys)

    def random_output(self, rng: DrawSource) -> int:
        return rng.draw(self.d)

    def outputs(self) -> Iterator[int]:
        return iter(range(self.d))

    def __repr__(self):
        return f"SingleHash(d={self.d})"


class VectorHash:
    """``k`` independent oracles over ``[0, m)``; outputs are k-tuples."""

    def __init__(self, m: int, k: int):
        if m < 1 or k < 1:
            raise ValueError(f"vector hash needs m >= 1 and k >= 1, got m={m}, k={k}")
        self.m = m
        self.k = k

    def new(self) -> HashVector:
        return HashVector.fresh(self.m, self.k)

    def hash(self, key, hv, rng):
        return hash_vec(key, hv, rng)

    def contains(self, hv, key, output) -> bool:
        return vec_contains(hv, key, output)

    def unseen(self, hv, key) -> bool:
        return vec_unseen(hv, key)

    def forget(self, hv, keys):
        return hv.without(keys)

    def random_output(self, rng: DrawSource) -> tuple[int, ...]:
        return tuple(rng.draw(self.m) for _ in range(self.k))

    def outputs(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(range(self.m), repeat=self.k)

    def __repr__(self):
        return f"VectorHash(m={self.m}, k={self.k})"


class MultiplexedHashKind:
    """Meta oracle over blocks composed with one inner hash state per block.

    Outputs are ``(block, inner_output)`` pairs.
    """

    def __init__(self, blocks: int, inner):
        if blocks < 1:
            raise ValueError(f"blocks must be >= 1, got {blocks}")
        self.blocks = blocks
        self.inner = inner

    def new(self) -> MultiplexedHash:
        return MultiplexedHash(HashState(self.blocks), tuple(self.inner.new() for _ in range(self.blocks)))

    def hash(self, key, mh, rng):
        return multiplexed_hash(key, mh, rng, self.inner)

    def contains(self, mh, key, output) -> bool:
        block, inner_out = output
        return contains(mh.meta, key, block) and self.inner.contains(mh.inner[block], key, inner_out)

    def unseen(self, mh, key) -> bool:
        return unseen(mh.meta, key) and all(self.inner.unseen(s, key) for s in mh.inner)

    def forget(self, mh, keys):
        keys = tuple(keys)
        return MultiplexedHash(mh.meta.without(keys), tuple(self.inner.forget(s, keys) for s in mh.inner))

    def random_output(self, rng: DrawSource):
        return rng.draw(self.blocks), self.inner.random_output(rng)

    def outputs(self):
        for b in range(self.blocks):
            for o in self.inner.outputs():
                yield b, o

    def __repr__(self):
        return f"MultiplexedHashKind(blocks={self.blocks}, inner={self.inner!r})"


def multiplexed_hash(key: int, mh: MultiplexedHash, rng: DrawSource, inner_kind):
    """Pick a block through the meta oracle, then hash again in that block.

    Only the selected block's inner state can change.
    """
    meta, block = hash_key(key, mh.meta, rng)
    inner_state, inner_out = inner_kind.hash(key, mh.inner[block], rng)
    if meta is mh.meta and inner_state is mh.inner[block]:
        return mh, (block, inner_out)
    inner = mh.inner[:block] + (inner_state,) + mh.inner[block + 1 :]
    return MultiplexedHash(meta, inner), (block, inner_out)


# --- serialization -----------------------------------------------------

HASH_MAGIC = b"AMQH1"


def encode_hash_state(state: HashState) -> bytes:
    """``AMQH1``, u32 domain size, u32 entry count, then (u64 key, u32 output)
    pairs sorted by key; all little-endian."""
    items = state.items()
    parts = [HASH_MAGIC, struct.pack("<II", state.domain_size, len(items))]
    parts += [struct.pack("<QI", key, out) for key, out in items]
    return b"".join(parts)


def decode_hash_state(data: bytes, offset: int = 0) -> tuple[HashState, int]:
    if data[offset : offset + 5] != HASH_MAGIC:
        raise ValueError("not an AMQH1 hash state")
    offset += 5
    d, n = struct.unpack_from("<II", data, offset)
    offset += 8
    mapping = {}
    for _ in range(n):
        key, out = struct.unpack_from("<QI", data, offset)
        offset += 12
        mapping[key] = out
    return HashState(d, mapping), offset
