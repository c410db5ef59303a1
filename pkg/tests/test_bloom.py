import math

import pytest
from hypothesis import given, strategies as st

from amqcheck.analytic import BloomParams, bloom_bit_set_prob, bloom_false_positive
from amqcheck.bloom import (
    BloomFilter,
    BloomState,
    bf_add_int,
    bf_from_bits,
    bf_get_int,
    bf_new,
    bf_query_int,
    decode,
    encode,
)
from amqcheck.harness import estimate_event, oracle_probability
from oracles import bloom_bit_bruteforce

F, T = False, True


def test_new():
    s = bf_new(4)
    assert s.as_list() == [F, F, F, F]
    assert s.popcount() == 0
    assert not any(bf_get_int(s, i) for i in range(4))
    with pytest.raises(ValueError):
        bf_new(0)


def test_add_and_query():
    s = bf_add_int(bf_new(4), [1, 3])
    assert s.as_list() == [F, T, F, T]
    assert bf_add_int(bf_new(4), [1, 1]) == bf_add_int(bf_new(4), [1])
    assert bf_add_int(s, []) == s
    assert bf_query_int(s, [1, 3])
    assert not bf_query_int(s, [0, 1])
    assert bf_query_int(s, [])
    assert bf_get_int(bf_add_int(bf_new(4), [2]), 2)


def test_index_errors():
    s = bf_new(4)
    for op in (lambda: bf_get_int(s, 4), lambda: bf_add_int(s, [4]), lambda: bf_query_int(s, [-1])):
        with pytest.raises(IndexError):
            op()


@given(st.integers(1, 70).flatmap(lambda m: st.tuples(st.just(m), st.lists(st.integers(0, m - 1), max_size=10),
                                                       st.lists(st.integers(0, m - 1), max_size=10))))
def test_monotone_and_insertion_valid(args):
    m, a, b = args
    s = bf_add_int(bf_new(m), a)
    s2 = bf_add_int(s, b)
    assert s.raised() <= s2.raised()
    assert bf_query_int(s2, b) and bf_query_int(s2, a)


@given(st.lists(st.booleans(), min_size=1, max_size=70))
def test_serialization_roundtrip(bits):
    s = bf_from_bits(bits)
    data = encode(s)
    assert data[:5] == b"AMQB1"
    assert int.from_bytes(data[5:9], "little") == len(bits)
    assert len(data) == 9 + (len(bits) + 7) // 8
    assert decode(data) == (s, len(data))


def test_serialization_bit_order():
    # bit 0 is the least significant bit of the first byte
    assert encode(bf_from_bits([T, F, F, F, F, F, F, F, F, T]))[9:] == bytes([0b1, 0b10])


def test_state_validation():
    with pytest.raises(ValueError):
        BloomState(3, 0b1000)


def bit_probe(i):
    return lambda s: bf_get_int(s, i)


def test_bit_flip_law_exact():
    for m in range(1, 4):
        for k in range(1, 3):
            bf = BloomFilter(m, k)
            for l in range(4):
                script = [("add", key) for key in range(l)]
                for i in range(m):
                    got = oracle_probability(bf, script + [("probe", bit_probe(i))], lambda r, s: r[-1])
                    assert got == bloom_bit_set_prob(BloomParams(m, k), l) == bloom_bit_bruteforce(m, k, l, i)


@pytest.mark.slow
def test_bit_flip_law_statistical():
    bf = BloomFilter(64, 3)
    script = [("addm", list(range(10))), ("probe", bit_probe(17))]
    hits, n, (low, high) = estimate_event(bf, script, lambda r, s: r[-1], 100_000, seed=2024)
    p = float(bloom_bit_set_prob(BloomParams(64, 3), 10))
    assert low <= p <= high
    assert abs(hits - n * p) <= 4 * math.sqrt(n * p * (1 - p))


def test_instance_false_positive_is_closed_form():
    assert BloomFilter(8, 2).false_positive(3) == bloom_false_positive(BloomParams(8, 2), 3)
