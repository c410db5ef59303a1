"""Brute-force reference computations shared by the tests.

Deliberately naive and independent of ``amqcheck``: they enumerate index
tuples with itertools and count.
"""

import itertools
from fractions import Fraction


def partitions_count(n, t):
    """Number of ways to split {0..n-1} into t non-empty unlabelled blocks."""
    if n == 0:
        return 1 if t == 0 else 0
    count = 0
    for labels in itertools.product(range(t), repeat=n):
        # canonical labelling: first occurrences appear in order 0, 1, 2, ...
        seen = []
        for x in labels:
            if x not in seen:
                seen.append(x)
        if len(seen) == t and seen == list(range(t)):
            count += 1
    return count


def bloom_fp_bruteforce(m, k, l):
    """P(query positive) for an unseen key after l unseen inserts, by counting."""
    hits = 0
    total = 0
    for draws in itertools.product(range(m), repeat=k * (l + 1)):
        bits = set(draws[: k * l])
        total += 1
        hits += all(i in bits for i in draws[k * l :])
    return Fraction(hits, total)


def bloom_bit_bruteforce(m, k, l, i):
    hits = total = 0
    for draws in itertools.product(range(m), repeat=k * l):
        total += 1
        hits += i in draws
    return Fraction(hits, total)


def quotient_fp_bruteforce(p, l):
    d = 2**p
    hits = total = 0
    for draws in itertools.product(range(d), repeat=l + 1):
        total += 1
        hits += draws[-1] in draws[:-1]
    return Fraction(hits, total)


def blocked_bloom_fp_bruteforce(blocks, m, k, l):
    """Each key draws a block, then k indices inside that block."""
    per_key = [(b, idx) for b in range(blocks) for idx in itertools.product(range(m), repeat=k)]
    hits = total = 0
    for outs in itertools.product(per_key, repeat=l + 1):
        raised = {(b, i) for b, idx in outs[:-1] for i in idx}
        qb, qidx = outs[-1]
        total += 1
        hits += all((qb, i) in raised for i in qidx)
    return Fraction(hits, total)
