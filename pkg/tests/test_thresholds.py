"""Threshold formulas, checked against an independent big-integer oracle."""

import math
from fractions import Fraction as F

import pytest

from lwtrop.thresholds import (
    central_path_budget,
    default_precision,
    delta_bound,
    delta_bound_guaranteed,
    min_valid_t,
    threshold_summary,
)
from lwtrop.trop_path import epsilon0

from oracles.threshold_oracle import digest, threshold_r2_half

# [DERIVED] frozen output of tests/oracles/threshold_oracle.py
ORACLE_DIGITS = 822
ORACLE_BITS = 2731
ORACLE_SHA256 = "ae0833c222596a7bcb2158319f877338dece5677e688af3005bad58eb96d67fb"


def test_min_valid_t_matches_oracle():
    v = min_valid_t(2, F(1, 2))
    oracle = threshold_r2_half()
    assert v == oracle
    assert digest(v) == ORACLE_SHA256
    assert len(str(v)) == ORACLE_DIGITS
    assert v.bit_length() == ORACLE_BITS


def test_bit_length_estimate():
    # [DERIVED] about 2 (24 log2(19!) + 3) bits
    est = 2 * (24 * math.log2(math.factorial(19)) + 3)
    assert abs(min_valid_t(2, F(1, 2)).bit_length() - est) < 1


def test_min_valid_t_monotone():
    # [TRIVIAL]
    thetas = [F(1, 4), F(1, 2), F(3, 4)]
    vals = {(r, th): min_valid_t(r, th) for r in (2, 3, 4) for th in thetas}
    for th in thetas:
        assert vals[(2, th)] < vals[(3, th)] < vals[(4, th)]
    for r in (2, 3, 4):
        assert vals[(r, thetas[0])] < vals[(r, thetas[1])] < vals[(r, thetas[2])]


def test_min_valid_t_domain():
    with pytest.raises(ValueError):
        min_valid_t(1, F(1, 2))
    with pytest.raises(ValueError):
        min_valid_t(2, 1)


def test_summary():
    s = threshold_summary(2, F(1, 2))
    assert (s.digits, s.bits) == (ORACLE_DIGITS, ORACLE_BITS)


@pytest.mark.parametrize("r", range(2, 9))
def test_epsilon0_formula(r):
    # [PAPER]
    assert epsilon0(r) == F(1, 3 * 2 ** (r - 1))


def test_delta_bound_example():
    # [DERIVED] direct evaluation at t = 10^100
    expected = 2 * (2 * math.log10(19) + 4 * math.log10(math.factorial(18))) / 100
    assert delta_bound(2, 10 ** 100) == pytest.approx(expected, rel=1e-12)


def test_delta_bound_vanishes():
    # [PAPER] convergence as t grows, on a doubling sequence of log t
    vals = [delta_bound(2, 10 ** (2 ** k)) for k in range(2, 10)]
    assert all(b == pytest.approx(a / 2) for a, b in zip(vals, vals[1:]))
    # [DERIVED] log t scaling from the 10^100 value
    assert vals[-1] == pytest.approx(delta_bound(2, 10 ** 100) * 100 / 512)


def test_delta_guarantee_flag():
    # [TRIVIAL]
    assert not delta_bound_guaranteed(2, 10 ** 6)
    assert delta_bound_guaranteed(2, 10 ** 400)


def test_budget_and_precision():
    t = 10 ** 8
    assert central_path_budget(2, t, 0.5) == pytest.approx(math.log(36, t) + delta_bound(2, t))
    assert default_precision(2, 10) == 256
    assert default_precision(2, 10 ** 16) == math.ceil(6 * 16 * math.log2(10)) + 128
    with pytest.raises(ValueError):
        delta_bound(2, 1)
