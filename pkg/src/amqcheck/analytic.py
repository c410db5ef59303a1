"""Closed-form false-positive and bit-set probabilities.

All results are exact ``Fraction`` values; ``to_float`` is the only way
out to floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from amqcheck.errors import FeasibilityError
from amqcheck.exactmath import binomial, factorial, pow_rat, stirling2

# exact-mode limits for bloom_false_positive
MAX_EXACT_M = 512
MAX_EXACT_DRAWS = 4096


@dataclass(frozen=True)
class BloomParams:
    m: int
    k: int

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError(f"Bloom parameters need m >= 1 and k >= 1, got m={self.m}, k={self.k}")


@dataclass(frozen=True)
class QuotientParams:
    q: int
    r: int

    def __post_init__(self):
        if self.q < 0 or self.r < 0 or self.q + self.r < 1:
            raise ValueError(f"quotient widths need q, r >= 0 and q + r >= 1, got q={self.q}, r={self.r}")

    @property
    def p(self) -> int:
        return self.q + self.r


@dataclass(frozen=True)
class BlockedParams:
    blocks: int
    inner: object

    def __post_init__(self):
        if self.blocks < 1:
            raise ValueError(f"blocks must be >= 1, got {self.blocks}")


def _check_l(l: int) -> None:
    if l < 0:
        raise ValueError(f"insert count must be >= 0, got {l}")


def bloom_bit_set_prob(params: BloomParams, l: int) -> Fraction:
    """Probability that a fixed bit is raised after ``l`` unseen inserts."""
    _check_l(l)
    return 1 - pow_rat(1 - Fraction(1, params.m), params.k * l)


def _bloom_fp_terms(m: int, k: int, l: int):
    kl = k * l
    for i in range(1, min(m, kl) + 1):
        yield i**k * factorial(i) * binomial(m, i) * stirling2(kl, i)


def bloom_false_positive(params: BloomParams, l: int) -> Fraction:
    """Exact probability that an unseen key tests positive after ``l`` inserts.

    (1 / m^(k(l+1))) * sum_{i=1..m} i^k * i! * C(m, i) * S(kl, i)

    Terms with i > kl vanish since S(kl, i) = 0 there. Raises
    ``FeasibilityError`` beyond m > 512 or k*l > 4096; see
    ``bloom_false_positive_float``.
    """
    _check_l(l)
    m, k = params.m, params.k
    if m > MAX_EXACT_M or k * l > MAX_EXACT_DRAWS:
        raise FeasibilityError(
            f"exact evaluation refused for m={m}, k*l={k * l} "
            f"(limits m <= {MAX_EXACT_M}, k*l <= {MAX_EXACT_DRAWS}); use float mode"
        )
    return Fraction(sum(_bloom_fp_terms(m, k, l)), m ** (k * (l + 1)))


def bloom_false_positive_float(params: BloomParams, l: int) -> float:
    """Float-mode variant: Stirling numbers stay exact, each term is divided
    with a correctly rounded big-integer division and the terms are summed
    with ``math.fsum``."""
    _check_l(l)
    m, k = params.m, params.k
    denom = m ** (k * (l + 1))
    return math.fsum(t / denom for t in _bloom_fp_terms(m, k, l))


def bloom_classic_bound(params: BloomParams, l: int) -> Fraction:
    """Historically incorrect approximation (1 - (1 - 1/m)^(kl))^k.

    Kept for comparison only; it is not the false-positive probability.
    """
    return pow_rat(bloom_bit_set_prob(params, l), params.k)


def quotient_false_positive(params: QuotientParams, l: int) -> Fraction:
    _check_l(l)
    return 1 - pow_rat(1 - Fraction(1, 2**params.p), l)


def blocked_false_positive(blocks: int, l: int, inner_fp: Callable[[int], Fraction]) -> Fraction:
    """Binomial mixture sum_i C(l,i) (1/b)^i (1-1/b)^(l-i) f(i).

    ``i`` is the number of the ``l`` inserts that land in the block the
    query is routed to.
    """
    if blocks < 1:
        raise ValueError(f"blocks must be >= 1, got {blocks}")
    _check_l(l)
    hit = Fraction(1, blocks)
    miss = 1 - hit
    total = Fraction(0)
    for i in range(l + 1):
        w = binomial(l, i) * pow_rat(hit, i) * pow_rat(miss, l - i)
        if w:
            total += w * Fraction(inner_fp(i))
    return total


def to_float(x: Fraction) -> float:
    # Fraction.__float__ is correctly rounded (integer true division)
    return float(x)


def format_exact(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_exact(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den or 1))
