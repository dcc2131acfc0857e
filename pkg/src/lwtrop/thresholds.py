"""Explicit thresholds on t and related constants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def min_valid_t(r: int, theta) -> int:
    """Exact threshold above which the iteration lower bound is guaranteed.

    ``(max((10r-2)!, ceil(((10r-1)!)^24 / (1-theta)^3)))^(2^(r-1))``.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    theta = Fraction(theta)
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    q = (1 - theta) ** 3
    second = math.factorial(10 * r - 1) ** 24 / q
    second = -((-second.numerator) // second.denominator)  # ceiling
    return max(math.factorial(10 * r - 2), second) ** (2 ** (r - 1))


def _log_t(value_log: float, t) -> float:
    return value_log / _ln(t)


def _ln(t) -> float:
    if isinstance(t, int):
        return math.log(t)
    if isinstance(t, Fraction):
        return math.log(t.numerator) - math.log(t.denominator)
    return math.log(float(t))


def delta_bound(r: int, t) -> float:
    """``2 log_t((2N+1)^2 ((2N)!)^4)`` with ``2N = 10r - 2``."""
    two_n = 10 * r - 2
    if _ln(t) <= 0:
        raise ValueError("t must exceed 1")
    inner = 2 * math.log(two_n + 1) + 4 * math.lgamma(two_n + 1)
    return 2 * inner / _ln(t)


def delta_guarantee_threshold_log(r: int) -> float:
    """Natural log of ``((2N)!)^(2^(r-1))``."""
    return 2 ** (r - 1) * math.lgamma(10 * r - 1)


def delta_bound_guaranteed(r: int, t) -> bool:
    return _ln(t) >= delta_guarantee_threshold_log(r)


def central_path_budget(r: int, t, theta) -> float:
    """``log_t(2N/(1-theta)) + delta_bound(r, t)`` with N = 5r - 1."""
    N = 5 * r - 1
    return math.log(2 * N / (1 - float(theta))) / _ln(t) + delta_bound(r, t)


def default_precision(r: int, t) -> int:
    """``max(256, ceil((r+4) log2 t) + 128)`` mantissa bits."""
    return max(256, math.ceil((r + 4) * _ln(t) / math.log(2)) + 128)


@dataclass(frozen=True)
class ThresholdSummary:
    r: int
    theta: Fraction
    digits: int
    bits: int


def threshold_summary(r: int, theta) -> ThresholdSummary:
    v = min_valid_t(r, theta)
    return ThresholdSummary(r, Fraction(theta), len(str(v)), v.bit_length())
