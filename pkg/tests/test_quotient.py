from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from amqcheck.analytic import QuotientParams, quotient_false_positive
from amqcheck.harness import oracle_false_positive
from amqcheck.quotient import (
    QuotientFilter,
    QuotientState,
    decode,
    encode,
    qf_add_int,
    qf_new,
    qf_query_int,
    quotient_split,
)
from oracles import quotient_fp_bruteforce


def test_split_examples():
    assert quotient_split(3, 1, 1) == (1, 1)
    assert all(quotient_split(o, 0, 3)[0] == 0 for o in range(8))
    with pytest.raises(ValueError):
        quotient_split(4, 1, 1)


def test_split_recombines():
    for q in range(5):
        for r in range(5):
            if q + r == 0:
                continue
            for o in range(2 ** (q + r)):
                quot, rem = quotient_split(o, q, r)
                assert 0 <= quot < 2**q and 0 <= rem < 2**r
                assert quot * 2**r + rem == o


def test_new():
    s = qf_new(1, 1)
    assert s.buckets == ((), ())
    assert s.stored() == 0
    assert QuotientFilter(1, 1).available_capacity(s, 10**6)
    with pytest.raises(ValueError):
        qf_new(0, 0)


def test_add_and_query():
    s = qf_add_int(qf_new(2, 2), 9)
    assert sum(1 for b in s.buckets if b) == 1 and s.stored() == 1
    s2 = qf_add_int(s, 9)
    assert s2.buckets[2] == (1, 1)
    assert qf_query_int(s, 9)
    assert not any(qf_query_int(qf_new(2, 2), o) for o in range(16))
    assert not qf_query_int(s, 10)  # same quotient, other remainder
    assert not qf_query_int(s, 13)  # same remainder, other quotient


@given(st.integers(0, 4), st.integers(0, 4), st.data())
def test_query_true_iff_exact_output_inserted(q, r, data):
    if q + r == 0:
        return
    outs = data.draw(st.lists(st.integers(0, 2 ** (q + r) - 1), max_size=12))
    s = qf_new(q, r)
    for o in outs:
        s = qf_add_int(s, o)
    assert s.stored() == len(outs)
    for y in range(2 ** (q + r)):
        assert qf_query_int(s, y) == (y in outs)


def test_fp_oracle_grid():
    for p in range(1, 4):
        for l in range(5):
            qf = QuotientFilter(p // 2, p - p // 2)
            got = oracle_false_positive(qf, l)
            assert got == quotient_false_positive(QuotientParams(qf.q, qf.r), l) == quotient_fp_bruteforce(p, l)
    assert oracle_false_positive(QuotientFilter(1, 1), 2) == Fraction(7, 16)


def test_serialization_roundtrip():
    s = qf_new(2, 3)
    for o in [5, 5, 31, 0, 12]:
        s = qf_add_int(s, o)
    data = encode(s)
    assert data[:7] == b"AMQQ1\x02\x03"
    assert decode(data) == (s, len(data))


def test_state_validation():
    with pytest.raises(ValueError):
        QuotientState(1, 1, ((),))
    with pytest.raises(ValueError):
        QuotientState(1, 1, ((2,), ()))
