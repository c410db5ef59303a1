import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from amqcheck.harness import enumerate_outcomes
from amqcheck.hashing import (
    HashState,
    HashVector,
    MultiplexedHashKind,
    Rng,
    SingleHash,
    VectorHash,
    contains,
    decode_hash_state,
    encode_hash_state,
    hash_key,
    hash_vec,
    mix,
    unseen,
)

keys = st.integers(0, 2**64 - 1)


def test_seen_key_returns_stored_output_without_drawing():
    s = HashState(8, {42: 3})
    rng = Rng(1)
    s2, out = hash_key(42, s, rng)
    assert out == 3 and s2 is s and rng.counter == 0


def test_single_outcome_domain():
    for seed in range(50):
        _, out = hash_key(seed, HashState(1), Rng(seed))
        assert out == 0


def test_unseen_key_uniform_over_two():
    trials = 100_000
    ones = sum(hash_key(7, HashState(2), Rng.for_trial(123, t))[1] for t in range(trials))
    sigma = math.sqrt(trials * 0.25)
    assert abs(ones - trials / 2) <= 4 * sigma


def test_rng_draws_in_range_and_reproducible():
    a, b = Rng(99), Rng(99)
    xs = [a.draw(d) for d in range(1, 200)]
    assert xs == [b.draw(d) for d in range(1, 200)]
    assert all(0 <= x < d for x, d in zip(xs, range(1, 200)))
    assert mix(1, 2) != mix(2, 1)
    with pytest.raises(ValueError):
        a.draw(0)


def test_contains_unseen():
    s = HashState(4)
    assert unseen(s, 5)
    s2, out = hash_key(5, s, Rng(0))
    assert contains(s2, 5, out)
    assert not unseen(s2, 5)
    assert unseen(s, 5)  # original untouched
    for o in range(4):
        assert not (contains(s2, 5, o) and unseen(s2, 5))


@given(st.dictionaries(keys, st.integers(0, 9), max_size=8), keys, st.integers(0, 2**32))
def test_hash_is_monotone_and_consistent(mapping, key, seed):
    s = HashState(10, mapping)
    s2, out = hash_key(key, s, Rng(seed))
    for k, v in mapping.items():
        assert s2.lookup(k) == v
    assert contains(s2, key, out)
    s3, out2 = hash_key(key, s2, Rng(seed + 1))
    assert (s3, out2) == (s2, out)


def test_hash_vec_examples():
    hv = HashVector((HashState(4, {1: 0}), HashState(4, {1: 3})))
    hv2, outs = hash_vec(1, hv, Rng(5))
    assert hv2 is hv and outs == (0, 3)
    single = HashVector.fresh(6, 1)
    _, a = hash_vec(9, single, Rng(17))
    _, b = hash_key(9, HashState(6), Rng(17))
    assert a == (b,)


@pytest.mark.parametrize("d, k", [(d, k) for d in range(1, 5) for k in range(1, 4)])
def test_hash_vec_uniform_by_enumeration(d, k):
    kind = VectorHash(d, k)
    enum = enumerate_outcomes(lambda src: kind.hash(77, kind.new(), src)[1])
    dist = enum.distribution()
    assert set(dist) == set(itertools.product(range(d), repeat=k))
    assert all(p == Fraction(1, d) ** k for p in dist.values())


def test_multiplexed_single_block_is_plain_inner():
    kind = MultiplexedHashKind(1, VectorHash(8, 2))
    inner = VectorHash(8, 2)
    for seed in range(100):
        mh, (block, out) = kind.hash(3, kind.new(), Rng(seed))
        _, plain = inner.hash(3, inner.new(), Rng(seed))
        assert block == 0 and out == plain


def test_multiplexed_seen_key_deterministic():
    kind = MultiplexedHashKind(3, SingleHash(4))
    mh, pair = kind.hash(11, kind.new(), Rng(2))
    mh2, pair2 = kind.hash(11, mh, Rng(999))
    assert mh2 is mh and pair2 == pair
    assert kind.contains(mh, 11, pair)
    # only the selected block's inner state was touched
    for b, s in enumerate(mh.inner):
        assert (len(s) == 1) == (b == pair[0])


def test_multiplexed_uniform_pairs():
    kind = MultiplexedHashKind(2, SingleHash(2))
    dist = enumerate_outcomes(lambda src: kind.hash(5, kind.new(), src)[1]).distribution()
    assert dist == {(b, o): Fraction(1, 4) for b in range(2) for o in range(2)}


def test_hash_state_serialization_roundtrip():
    s = HashState(1000, {2**64 - 1: 999, 0: 0, 12345: 17})
    data = encode_hash_state(s)
    assert data.startswith(b"AMQH1")
    assert data[5:9] == (1000).to_bytes(4, "little")
    back, end = decode_hash_state(data)
    assert back == s and end == len(data)
    with pytest.raises(ValueError):
        decode_hash_state(b"XXXXX" + data[5:])


def test_hash_state_validation():
    with pytest.raises(ValueError):
        HashState(0)
    with pytest.raises(ValueError):
        HashState(3, {1: 3})
    with pytest.raises(ValueError):
        HashVector((HashState(2), HashState(3)))


def test_same_seed_same_trace():
    kind = VectorHash(16, 3)

    def trace(seed):
        rng, hv, outs = Rng(seed), kind.new(), []
        for key in [5, 9, 5, 1, 9]:
            hv, o = kind.hash(key, hv, rng)
            outs.append(o)
        return hv, outs

    assert trace(4) == trace(4)
