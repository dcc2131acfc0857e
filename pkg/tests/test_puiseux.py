"""Exact series, valuation, evaluation and monomial-matrix determinant estimates."""

import math
import random
from fractions import Fraction as F

import gmpy2
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lwtrop.puiseux import (
    MonomialMatrix,
    PrecisionError,
    PuiseuxSeries,
    bordered_matrix,
    det_log_bounds,
    det_series,
    eta,
    eta0,
    evaluate,
    lw_eta0_bound,
    series_add,
    series_cmp,
    series_mul,
    val,
)
from lwtrop.tropical import BOTTOM, trop_mul
from lwtrop.verify import check_det_bracket, exact_det, random_monomial_matrix

S = PuiseuxSeries
T = S.monomial(1, 1)


def mono(e, c=1):
    return S.monomial(c, F(e))


exps = st.fractions(min_value=-6, max_value=6, max_denominator=8)
coefs = st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(lambda c: c != 0)
series = st.lists(st.tuples(coefs, exps), max_size=4).map(S)


def test_val_examples():
    # [TRIVIAL]
    assert val(S([(2, 3), (-1, 1)])) == 3
    assert val(S()) is BOTTOM
    # [PAPER] val is multiplicative
    f, g = T - 1, T + 1
    assert val(f * g) == trop_mul(val(f), val(g)) == 2


def test_add_mul_cmp_examples():
    # [TRIVIAL]
    assert series_add(T - 1, 1) == T
    assert series_mul(mono(F(1, 2)), mono(F(1, 2))) == T
    # [PAPER] eventual order
    assert series_cmp(T, 1000) == ">"
    assert series_cmp(T - 1, T) == "<"
    assert series_cmp(T, T) == "="


def test_canonical_form():
    f = S([(1, 2), (2, 2), (-3, 2), (1, F(1, 2))])
    assert f.terms == ((F(1), F(1, 2)),)
    with pytest.raises(TypeError):
        S([(0.5, 1)])


@given(series, series)
def test_val_homomorphism(f, g):
    assert val(f * g) == trop_mul(val(f), val(g))
    assert val(f + g) <= max(val(f), val(g))
    if val(f) != val(g):
        assert val(f + g) == max(val(f), val(g))


@given(series)
def test_json_roundtrip(f):
    assert S.from_json(f.to_json()) == f


@given(series, series)
def test_order_is_total_and_compatible(f, g):
    c = series_cmp(f, g)
    assert c == {"<": ">", ">": "<", "=": "="}[series_cmp(g, f)]
    assert (c == "=") == (f == g)


def test_evaluate_examples():
    # [TRIVIAL]
    assert evaluate(mono(F(1, 2)), 4) == 2
    assert evaluate(mono(1 - F(1, 2)), 9) == 3
    assert evaluate(S([(1, 2), (-1, 1)]), 10) == 90


def test_evaluate_high_precision():
    v = evaluate(mono(F(3, 4)), 16, precision_bits=512)
    assert v == 8
    with gmpy2.context(precision=512):
        w = evaluate(mono(F(1, 3)), 2, precision_bits=512)
        assert abs(w ** 3 - 2) < gmpy2.mpfr(2) ** -500


def test_evaluate_errors():
    with pytest.raises(ValueError):
        evaluate(T, 0)
    with pytest.raises(ValueError):
        evaluate(T, 10, precision_bits=8)
    with pytest.raises(PrecisionError):
        evaluate(mono(10 ** 12), 10)


# ---------------------------------------------------------------- eta and det

def test_eta_examples():
    # [DERIVED] enumerate permutations
    assert eta(MonomialMatrix([[T, 1], [1, T]])) == 2
    # [TRIVIAL] a single finite sum gives +inf
    assert eta(MonomialMatrix([[T, 0], [0, T]])) == math.inf
    assert eta(MonomialMatrix([[mono(F(1, 2)), 1], [1, mono(F(1, 4))]])) == F(3, 4)


def test_eta_requires_square():
    with pytest.raises(ValueError):
        eta(MonomialMatrix([[T, 1]]))


def test_monomial_matrix_rejects_sums():
    with pytest.raises(ValueError):
        MonomialMatrix([[T + 1]])


def test_det_bracket_examples():
    # [DERIVED] direct evaluation of t^2 - 1 at t = 10
    br = det_log_bounds(MonomialMatrix([[T, 1], [1, T]]), 10)
    assert br.val_det == 2
    assert br.guaranteed
    assert br.lower <= math.log10(99) <= br.upper
    assert abs(math.log10(99) - 2) <= math.log10(2)
    # [TRIVIAL] diagonal: exact value inside a 2 log_t 2 bracket
    br = det_log_bounds(MonomialMatrix([[T, 0], [0, T]]), 7)
    assert br.upper - br.lower == pytest.approx(2 * math.log(2, 7))
    assert br.lower <= 2 <= br.upper
    # [PAPER] singular case
    br = det_log_bounds(MonomialMatrix([[1, T], [1, T]]), 10)
    assert br.val_det is BOTTOM
    assert det_series(MonomialMatrix([[1, T], [1, T]])).is_zero()


def test_det_bracket_not_guaranteed_for_general_coefficients():
    M = MonomialMatrix([[mono(1, 3), 1], [1, T]])
    assert not det_log_bounds(M, 10).guaranteed


def _at_16(c, e):
    # 16^e is exact for exponents with denominator dividing 4
    return c * F(2) ** int(4 * e)


def test_det_series_matches_exact_elimination():
    # [DERIVED] Fraction elimination at t = 16
    rng = random.Random(5)
    for _ in range(40):
        M = random_monomial_matrix(rng, rng.randint(1, 4))
        numeric = exact_det([[_at_16(*v.terms[0]) if not v.is_zero() else F(0) for v in row]
                             for row in M.entries])
        assert sum((_at_16(c, e) for c, e in det_series(M).terms), F(0)) == numeric


def test_random_brackets_hold():
    rng = random.Random(11)
    for _ in range(25):
        assert check_det_bracket(random_monomial_matrix(rng, rng.randint(1, 5)))


# ---------------------------------------------------------------- eta0

def test_bordered_shape():
    B = bordered_matrix(MonomialMatrix([[T, 1], [1, T]]), [T, 1])
    assert B.shape == (3, 4)
    assert val(B[2, 3]) == 0 and B[0, 3].is_zero()


def test_eta0_one_by_one_has_no_constraint():
    # Listed as finite; the bordered matrix has one nonvanishing permutation in
    # every square submatrix of order 2, so no gap exists.  See ledger.
    assert eta0(MonomialMatrix([[T]]), [mono(2)]) == math.inf


def test_eta0_finite_case():
    # [DERIVED] columns 1..3 of the bordered matrix give permutation sums {0, 1}
    A = MonomialMatrix([[T, 1], [1, T]])
    assert eta0(A, [mono(0), mono(0)]) == 1


def test_eta0_analytic_bound_for_lw():
    # [PAPER] eta0 >= 1/2^{r-1} on the LW family
    assert lw_eta0_bound(1) == 1
    assert lw_eta0_bound(4) == F(1, 8)
    with pytest.raises(ValueError):
        eta0(MonomialMatrix([[T] * 13] * 13), [T] * 13)
    assert eta0(MonomialMatrix([[T] * 13] * 13), [T] * 13, analytic_bound=F(1, 8)) == F(1, 8)
