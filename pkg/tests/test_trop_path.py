"""Tropical central path of LW(r): recursion, breakpoints, gamma, curvature, sampling."""

import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lwtrop.tropical import BOTTOM, RIGHT_ANGLE, TropPoint, brute_force_gamma
from lwtrop.trop_path import (
    SublevelSampler,
    barycenter_check,
    breakpoints,
    curvature_grid,
    epsilon0,
    full_tgap,
    gamma,
    gamma_count,
    last_pair,
    min_vertex_gap,
    point_tgap,
    tgap,
    trop_curvature_angles,
    trop_curvature_lower_bound,
    trop_path_point,
    trop_path_w,
    trop_path_x,
    verify_membership,
)
from lwtrop.verify import check_table1, table1_expected

lams = st.fractions(min_value=-2, max_value=6, max_denominator=64)


def P(*v):
    return TropPoint([F(x) for x in v])


# ---------------------------------------------------------------- recursion

def test_x_examples():
    # [PAPER] Table 1 columns
    assert trop_path_x(2, 0) == P(0, 1, 1, F(3, 2))
    assert trop_path_x(2, 2) == P(2, 1, 2, F(5, 2))
    assert trop_path_x(3, F(1, 2)) == P(F(1, 2), 1, F(3, 2), F(3, 2), F(5, 2), F(9, 4))


def test_w_examples():
    # [PAPER] Table 1 columns
    assert trop_path_w(2, 0) == P(2, 1, 1, 2, F(3, 2))
    assert trop_path_w(2, 1) == P(2, 1, 2, 2, F(3, 2))
    w = trop_path_w(3, 1)
    # The worked example lists w_6 = 5/2.  Table 1 (j=2, lambda=4/4, first w row:
    # j + (2k+4)/2^j = 3) and the recursion w_6 = 1 + x_3 = 1 + 2 both give 3.
    assert w[5] == 3
    assert w[6] == F(5, 2) and w[7] == F(11, 4)


def test_point_examples():
    # [TRIVIAL] subtraction from the x and w examples
    p = trop_path_point(2, 0)
    assert p.s == P(0, -1, -1, F(-3, 2))
    assert p.y == P(-2, -1, -1, -2, F(-3, 2))
    # [DERIVED] recursion then subtraction
    p = trop_path_point(1, 5)
    assert (p.x, p.w, p.s, p.y) == (P(2, 1), P(2, 1), P(3, 4), P(3, 4))


@given(st.integers(1, 6), lams)
def test_complementarity_and_tgap(r, lam):
    p = trop_path_point(r, lam)
    assert all(a + b == lam for a, b in zip(p.x, p.s))
    assert all(a + b == lam for a, b in zip(p.w, p.y))
    assert point_tgap(p) == lam
    assert full_tgap(r, p.full()) == lam


@given(st.integers(2, 6), st.fractions(0, 2, max_denominator=64))
def test_denominators(r, lam):
    den = math.lcm(2 ** (r - 1), lam.denominator)
    assert all((v * den).denominator == 1 for v in trop_path_point(r, lam).full())


def test_tgap_examples():
    # [TRIVIAL]
    assert tgap([0], [3], [1], [1]) == 3
    assert tgap([0, BOTTOM], [0, BOTTOM], [BOTTOM], [BOTTOM]) == 0


def test_table1_reproduction():
    ok, detail = check_table1()
    assert ok, detail


def test_table1_closed_form_spot():
    # j=2, k=0, lambda = 4/4: x_5 = 2 + 2/4, x_6 = 2 + 3/4
    exp = table1_expected(2, F(1), 0)
    assert exp["x_odd"] == F(5, 2) and exp["x_even"] == F(11, 4)


def test_table1_mutation_is_caught():
    def bad_x(r, lam):
        x = list(trop_path_x(r, lam))
        x[-1] += F(1, 2 ** r)
        return TropPoint(x)

    ok, detail = check_table1(x_fn=bad_x)
    assert not ok and "x_even" in detail


# ---------------------------------------------------------------- membership

def test_membership_r4():
    # [DERIVED] direct substitution
    rep = verify_membership(4, F(7, 8))
    assert rep.ok and rep.all_slack_tight


def test_membership_perturbation_flags_w5():
    # [TRIVIAL] constructed violation
    x = list(trop_path_x(4, F(7, 8)))
    x[3] += F(1, 16)
    rep = verify_membership(4, F(7, 8), x=x)
    assert not rep.ok
    assert rep.violations == ["w5"]


def test_membership_saturated():
    # [TRIVIAL] x_1 = 2 is tight on x_1 <= 2 and slack on x_1 <= lambda
    rep = verify_membership(2, 10)
    assert rep.ok
    assert trop_path_x(2, 10)[0] == 2
    assert rep.objective_ok and not rep.objective_tight


@given(st.integers(1, 6), lams)
def test_membership_everywhere(r, lam):
    assert verify_membership(r, lam).ok


# ---------------------------------------------------------------- breakpoints

def test_breakpoints_r2():
    # [DERIVED] recursion sampled at step 1/4
    dec = breakpoints(2, 0, 2)
    assert dec.lambdas == [0, 1, 2]
    assert dec.kinks == [1]


def test_breakpoints_r1_saturation():
    # [DERIVED] x_1 saturates at 2
    dec = breakpoints(1, -1, 3)
    assert dec.kinks == [2]


@pytest.mark.parametrize("r", [1, 2, 5])
def test_constant_region(r):
    # [PAPER] path constant on [2, inf)
    dec = breakpoints(r, 3, 5)
    assert dec.kinks == []
    assert trop_path_point(r, 3).primal() == trop_path_point(r, 5).primal()


def test_breakpoints_bad_interval():
    with pytest.raises(ValueError):
        breakpoints(2, 1, 0)


@pytest.mark.parametrize("r", range(2, 9))
def test_staircase(r):
    # [PAPER] 2^{r-1} alternating pieces on the last pair
    dec = breakpoints(r, 0, 2)
    pieces = dec.project(last_pair(r))
    assert len(pieces) == 2 ** (r - 1)
    assert all(len(p.K) == 1 for p in pieces)
    assert all(a.K != b.K for a, b in zip(pieces, pieces[1:]))
    assert gamma_count(dec, last_pair(r)) >= 2 ** (r - 1)


def test_gamma_r3():
    # [PAPER]
    assert gamma(3, project=last_pair(3)) == 4


@pytest.mark.parametrize("r", range(2, 6))
def test_gamma_greedy_vs_brute_force_on_projection(r):
    dec = breakpoints(r, 0, 2)
    pts = dec.projected_points(last_pair(r))
    assert brute_force_gamma(pts) == gamma_count(dec, last_pair(r))


@pytest.mark.parametrize("r", range(3, 7))
def test_epsilon0_consistency(r):
    # [PAPER] 6 epsilon0 equals the minimal vertex gap 1/2^{r-2}
    assert 6 * epsilon0(r) == min_vertex_gap(r) == F(1, 2 ** (r - 2))


def test_epsilon0_examples():
    # [PAPER] formula
    assert epsilon0(2) == F(1, 6)
    assert epsilon0(5) == F(1, 48)
    with pytest.raises(ValueError):
        epsilon0(1)


# ---------------------------------------------------------------- curvature

def test_curvature_r4():
    # [PAPER] (2^2 - 1) right angles
    grid = [F(4 * k, 8) for k in range(5)]
    assert grid == curvature_grid(4)
    assert trop_curvature_lower_bound(4, grid).right_angles == 3


def test_curvature_r2_and_flat():
    # [TRIVIAL]
    assert trop_curvature_lower_bound(2).right_angles == 0
    assert trop_curvature_lower_bound(5, [F(3), F(7, 2), F(4)]).right_angles == 0


@pytest.mark.parametrize("r", range(3, 9))
def test_curvature_count(r):
    angles = trop_curvature_angles(r, curvature_grid(r))
    assert sum(a.right_angles for a in angles) == 2 ** (r - 2) - 1
    # every interior grid vertex carries a right angle
    assert all(a == RIGHT_ANGLE for a in angles)


# ---------------------------------------------------------------- sampling oracle

@pytest.mark.parametrize("r,lam", [(2, F(1, 2)), (3, F(5, 4)), (2, F(5)), (3, F(-1, 2))])
def test_sublevel_samples_below_path(r, lam):
    bad, bary = barycenter_check(r, lam, 500, random.Random(3))
    assert bad == 0
    assert bary == trop_path_point(r, lam).full()


def test_samples_satisfy_gap_bound():
    rng = random.Random(1)
    for r, lam in [(2, F(3, 4)), (3, F(3, 2))]:
        s = SublevelSampler(r, lam)
        for _ in range(200):
            z = s.draw(rng)
            assert full_tgap(r, z) <= lam


def test_sampler_detects_a_lowered_target():
    # the sampler must reach the path point, otherwise the oracle is vacuous
    r, lam = 3, F(1)
    s = SublevelSampler(r, lam)
    target = s.scaled(trop_path_point(r, lam).full())
    rng = random.Random(9)
    hits = [False] * len(target)
    for _ in range(3000):
        z = s.draw_raw(rng)
        for i, (a, b) in enumerate(zip(z, target)):
            if a == b:
                hits[i] = True
    assert all(hits)
