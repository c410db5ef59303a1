"""Exact integer combinatorics and rational powers.

Everything here works on Python ints and ``fractions.Fraction``; nothing
is ever rounded.
"""

from __future__ import annotations

import math
from fractions import Fraction

MAX_ARG = 10_000


def _check(*args: int) -> None:
    for a in args:
        if not isinstance(a, int) or a < 0:
            raise ValueError(f"expected a non-negative integer, got {a!r}")
        if a > MAX_ARG:
            raise ValueError(f"argument {a} exceeds supported bound {MAX_ARG}")


def factorial(n: int) -> int:
    _check(n)
    return math.factorial(n)


def binomial(n: int, k: int) -> int:
    """C(n, k), zero when k > n."""
    _check(n, k)
    return math.comb(n, k)


def falling_factorial(m: int, t: int) -> int:
    _check(m, t)
    return math.perm(m, t)


def stirling2(n: int, t: int) -> int:
    """Stirling number of the second kind by inclusion-exclusion.

    S(n, t) = (1/t!) * sum_{j=0..t} (-1)^j C(t, j) (t - j)^n

    The even-j and odd-j terms are accumulated separately so the
    subtraction happens once, on non-negative integers, before the exact
    division by t!.
    """
    _check(n, t)
    positive = 0
    negative = 0
    for j in range(t + 1):
        term = math.comb(t, j) * (t - j) ** n
        if j % 2:
            negative += term
        else:
            positive += term
    surjections = positive - negative
    assert surjections >= 0, (n, t, positive, negative)
    count, rem = divmod(surjections, math.factorial(t))
    assert rem == 0, (n, t)
    return count


def stirling2_recurrence(n: int, t: int) -> int:
    """S(n, t) via S(n, t) = t*S(n-1, t) + S(n-1, t-1)."""
    _check(n, t)
    if t > n:
        return 0
    # one row at a time, only columns 0..t are needed
    row = [1] + [0] * t
    for i in range(1, n + 1):
        new = [0] * (t + 1)
        for j in range(1, min(i, t) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[t]


def pow_rat(base: Fraction | int, e: int) -> Fraction:
    _check(e)
    return Fraction(base) ** e
