"""Log-domain helpers for sums of nonnegative terms."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

NEG_INF = float("-inf")


@lru_cache(maxsize=65536)
def log_comb(n: int, k: int) -> float:
    if k < 0 or k > n:
        return NEG_INF
    # math.log on the exact integer is correctly rounded, unlike lgamma differences
    return math.log(math.comb(n, k))


def logsumexp(logs: Iterable[float]) -> float:
    vals = [x for x in logs if x != NEG_INF]
    if not vals:
        return NEG_INF
    m = max(vals)
    return m + math.log(math.fsum(math.exp(x - m) for x in vals))


def log_binom_pmf(n: int, k: int, logp: float, log1mp: float) -> float:
    if k < 0 or k > n:
        return NEG_INF
    return log_comb(n, k) + _mul(k, logp) + _mul(n - k, log1mp)


def _mul(k: int, logx: float) -> float:
    # 0 * log(0) is 0 here (0**0 == 1)
    return 0.0 if k == 0 else k * logx


def log_fraction(x: Fraction) -> float:
    """Natural log of a positive rational without float underflow."""
    if x <= 0:
        return NEG_INF if x == 0 else float("nan")
    return math.log(x.numerator) - math.log(x.denominator)


def ceil_div(num: int, den: int) -> int:
    return -((-num) // den)


def round_half_away(x: Fraction) -> int:
    """Nearest integer, ties away from zero."""
    if x >= 0:
        return math.floor(x + Fraction(1, 2))
    return -math.floor(-x + Fraction(1, 2))
