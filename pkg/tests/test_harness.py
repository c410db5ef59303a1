import json
from fractions import Fraction

import pytest

from amqcheck.blocked import blocked_bloom
from amqcheck.bloom import BloomFilter
from amqcheck.counting_bloom import CountingBloomFilter
from amqcheck.errors import EnumerationTooLarge
from amqcheck.harness import (
    check_no_false_negatives,
    enumerate_outcomes,
    estimate_fp,
    fp_script,
    last_result,
    oracle_distribution,
    oracle_false_positive,
    oracle_probability,
    wilson_interval,
)
from amqcheck.quotient import QuotientFilter


def test_enumeration_covers_product_space():
    enum = enumerate_outcomes(lambda src: (src.draw(2), src.draw(3), src.draw(1)))
    assert enum.domain_sizes == (2, 3)
    assert enum.total == 6 and enum.leaves == 6
    assert sorted(r for _, r in enum.outcomes) == [(a, b, 0) for a in range(2) for b in range(3)]
    assert sum(w for w, _ in enum.outcomes) == 1


def test_enumeration_irregular_tree():
    # second draw only happens on one branch
    enum = enumerate_outcomes(lambda src: src.draw(2) and src.draw(4))
    dist = enum.distribution()
    assert dist == {0: Fraction(1, 2) + Fraction(1, 8), 1: Fraction(1, 8), 2: Fraction(1, 8), 3: Fraction(1, 8)}


def test_oracle_examples():
    assert oracle_false_positive(BloomFilter(2, 1), 1) == Fraction(1, 2)
    bf = BloomFilter(3, 2)
    assert oracle_probability(bf, [("add", 0), ("add", 1), ("query", 0)], last_result) == 1
    hv = BloomFilter(2, 2)
    assert oracle_probability(hv, [("hash", 5)], lambda r, s: r[0] == (1, 0)) == Fraction(1, 4)


@pytest.mark.parametrize("amq", [BloomFilter(2, 2), CountingBloomFilter(3, 1, 5), QuotientFilter(1, 1),
                                 blocked_bloom(2, 2, 1)], ids=repr)
def test_modes_agree_and_normalise(amq):
    for l in range(3):
        replay = oracle_distribution(amq, fp_script(l), mode="replay")
        merged = oracle_distribution(amq, fp_script(l), mode="merged")
        assert sum(replay.values()) == 1 == sum(merged.values())
        assert replay == merged


def test_seen_keys_draw_nothing():
    bf = BloomFilter(3, 2)
    base = [("add", 0)]
    again = [("add", 0), ("query", 0), ("add", 0)]
    sizes = []
    for script in (base, again):
        enum = enumerate_outcomes(lambda src, s=script: oracle_run(bf, s, src))
        sizes.append(enum.draw_count)
    assert sizes[0] == sizes[1] == 2
    # and the reduced program has the same distribution over the filter state
    assert oracle_distribution(bf, base, mode="replay") == {
        ((), s): p for (r, s), p in oracle_distribution(bf, again, mode="replay").items()
    }


def oracle_run(amq, script, src):
    from amqcheck.harness import run_script

    return run_script(amq, script, src).state


def test_enumeration_guard():
    with pytest.raises(EnumerationTooLarge):
        oracle_false_positive(BloomFilter(64, 3), 10)
    with pytest.raises(EnumerationTooLarge):
        oracle_false_positive(BloomFilter(4, 3), 3, mode="replay")
    with pytest.raises(EnumerationTooLarge):
        oracle_false_positive(BloomFilter(8, 2), 2, limit=100)


def test_wilson_examples():
    assert wilson_interval(0, 50, 2.0)[0] == 0
    assert wilson_interval(50, 50, 2.0)[1] == 1
    low, high = wilson_interval(50, 100, 1.96)
    assert low == pytest.approx(0.404, abs=1e-3)
    assert high == pytest.approx(0.596, abs=1e-3)
    for bad in [(5, 4, 1.0), (1, 0, 1.0), (1, 3, 0.0)]:
        with pytest.raises(ValueError):
            wilson_interval(*bad)


def test_wilson_contains_estimate():
    for n in (1, 7, 100):
        for s in range(n + 1):
            low, high = wilson_interval(s, n, 4.0)
            assert 0 <= low <= s / n <= high <= 1


def test_estimate_fp_zero_inserts():
    rep = estimate_fp(BloomFilter(8, 2), 0, 500, seed=1)
    assert rep.successes == 0 and rep.estimate == 0 and rep.analytic == 0


def test_estimate_fp_deterministic():
    a = estimate_fp(QuotientFilter(2, 2), 3, 2000, seed=9)
    b = estimate_fp(QuotientFilter(2, 2), 3, 2000, seed=9)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    assert set(a.to_dict()) == {"structure", "params", "l", "trials", "seed", "successes", "estimate", "ci_low",
                                "ci_high", "analytic_exact", "analytic_float", "z", "aborted_trials"}


def test_estimate_fp_counts_capacity_aborts():
    rep = estimate_fp(CountingBloomFilter(4, 2, 3), 2, 100, seed=0)
    assert rep.aborted_trials == 100 and rep.successes == 0


def test_estimate_shrinks_with_more_trials():
    bf = BloomFilter(16, 2)
    exact = float(bf.false_positive(6))
    small = estimate_fp(bf, 6, 200, seed=3)
    big = estimate_fp(bf, 6, 20_000, seed=3)
    assert big.ci_high - big.ci_low < small.ci_high - small.ci_low
    assert big.ci_low <= exact <= big.ci_high


def test_check_no_false_negatives():
    bf = BloomFilter(16, 2)
    assert check_no_false_negatives(bf, 0, 100, seed=1).passed
    assert check_no_false_negatives(bf, 5, 200, seed=1).passed
    res = check_no_false_negatives(bf, 5, 200, seed=1, tamper=lambda s: bf.new())
    assert not res.passed and "seed" in res.counterexample
