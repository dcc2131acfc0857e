"""Exact tropical central path of LW(r): recursion, breakpoints, gamma, angles.

All quantities are ``Fraction``s.  A full primal-dual point is the
concatenation (x, w, s, y) of length 2N with N = 5r - 1.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .instances import build_lw
from .puiseux import val
from .tropical import (
    BOTTOM,
    Angle,
    TropPoint,
    dinf_distance,
    gamma_count as _gamma_of_sets,
    trop_add,
    trop_mul,
    weak_tropical_angle,
)


def _check_r(r: int) -> None:
    if not isinstance(r, int) or r < 1:
        raise ValueError(f"r must be an integer >= 1, got {r!r}")


def trop_path_x(r: int, lam) -> TropPoint:
    _check_r(r)
    lam = Fraction(lam)
    x = [min(lam, Fraction(2)), Fraction(1)]
    for j in range(1, r):
        a, b = x[2 * j - 2], x[2 * j - 1]
        x.append(1 + min(a, b))
        x.append(1 - Fraction(1, 2 ** j) + max(a, b))
    return TropPoint(x)


def trop_path_w(r: int, lam, x: TropPoint | None = None) -> TropPoint:
    _check_r(r)
    x = trop_path_x(r, lam) if x is None else x
    w = [Fraction(2), Fraction(1)]
    for j in range(1, r):
        w += [1 + x[2 * j - 2], 1 + x[2 * j - 1], x[2 * j + 1]]
    return TropPoint(w)


@dataclass(frozen=True)
class TropCPPoint:
    lam: Fraction
    x: TropPoint
    w: TropPoint
    s: TropPoint
    y: TropPoint

    def full(self) -> TropPoint:
        """Concatenation (x, w, s, y)."""
        return TropPoint(tuple(self.x) + tuple(self.w) + tuple(self.s) + tuple(self.y))

    def primal(self) -> TropPoint:
        return TropPoint(tuple(self.x) + tuple(self.w))


def trop_path_point(r: int, lam) -> TropCPPoint:
    lam = Fraction(lam)
    x = trop_path_x(r, lam)
    w = trop_path_w(r, lam, x)
    s = TropPoint(lam - v for v in x)
    y = TropPoint(lam - v for v in w)
    return TropCPPoint(lam, x, w, s, y)


def tgap(x: Sequence, s: Sequence, w: Sequence, y: Sequence):
    """Tropical duality gap, the max over all complementary products."""
    if len(x) != len(s) or len(w) != len(y):
        raise ValueError("inconsistent component dimensions")
    acc = BOTTOM
    for a, b in list(zip(x, s)) + list(zip(w, y)):
        acc = trop_add(acc, trop_mul(a, b))
    return acc


def point_tgap(z: TropCPPoint):
    return tgap(z.x, z.s, z.w, z.y)


# ------------------------------------------------------------ membership

@dataclass
class RowCheck:
    row: str
    holds: bool
    tight: bool
    detail: str


@dataclass
class MembershipReport:
    r: int
    lam: Fraction
    rows: list = field(default_factory=list)
    objective_ok: bool = True
    objective_tight: bool = False

    @property
    def ok(self) -> bool:
        return self.objective_ok and all(c.holds for c in self.rows)

    @property
    def all_slack_tight(self) -> bool:
        return all(c.tight for c in self.rows)

    @property
    def violations(self) -> list[str]:
        out = [c.row for c in self.rows if not c.holds]
        if not self.objective_ok:
            out.append("objective")
        return out

    def __bool__(self):
        return self.ok


def _row_parts(lp, i, x):
    """(positive x-side max, rhs max) of row i in tropical terms."""
    pos = BOTTOM
    rhs = val(lp.b[i])
    for k, a in enumerate(lp.A.entries[i]):
        if a.is_zero():
            continue
        term = trop_mul(val(a), x[k])
        if a.sign() > 0:
            pos = trop_add(pos, term)
        else:
            rhs = trop_add(rhs, term)
    return pos, rhs


def verify_membership(r: int, lam, x: Sequence | None = None,
                      w: Sequence | None = None) -> MembershipReport:
    """Check the tropical primal inequalities and slack relations at lam.

    Row i of the slack system reads ``max(pos_i(x), w_i) = rhs_i(x)``.  It
    holds when ``pos_i(x) <= rhs_i(x)`` and ``w_i <= rhs_i(x)``; the slack
    relation is tight when ``w_i = rhs_i(x)``.  The objective row checks
    ``x_1 <= lam``.
    """
    lam = Fraction(lam)
    lp = build_lw(r)
    x = list(trop_path_x(r, lam)) if x is None else [Fraction(v) for v in x]
    w = list(trop_path_w(r, lam, TropPoint(x))) if w is None else [Fraction(v) for v in w]
    rep = MembershipReport(r, lam)
    for i in range(lp.m):
        pos, rhs = _row_parts(lp, i, x)
        holds = pos <= rhs and w[i] <= rhs
        tight = w[i] == rhs
        rep.rows.append(RowCheck(f"w{i + 1}", holds, tight,
                                 f"max(x-terms)={pos}, w={w[i]}, rhs={rhs}"))
    rep.objective_ok = x[0] <= lam
    rep.objective_tight = x[0] == lam
    return rep


# ------------------------------------------------------------ breakpoints

def _full_vector(r: int, lam: Fraction) -> tuple:
    return tuple(trop_path_point(r, lam).full())


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    K: frozenset  # primal coordinates (0-based over x then w) moving with slope 1


@dataclass(frozen=True)
class BreakpointDecomposition:
    r: int
    lo: Fraction
    hi: Fraction
    pieces: tuple

    @property
    def N(self) -> int:
        return 5 * self.r - 1

    @property
    def lambdas(self) -> list[Fraction]:
        """Piece boundaries including both ends."""
        if not self.pieces:
            return [self.lo] if self.lo == self.hi else [self.lo, self.hi]
        return [self.pieces[0].lo] + [p.hi for p in self.pieces]

    @property
    def kinks(self) -> list[Fraction]:
        """Interior breakpoints where the direction changes."""
        return [p.hi for p in self.pieces[:-1]]

    def full_direction_sets(self) -> list[frozenset]:
        """Direction sets in the 2N-dimensional (primal, dual) space."""
        N = self.N
        return [p.K | frozenset(N + k for k in range(N) if k not in p.K) for p in self.pieces]

    def project(self, indices: Sequence[int]) -> list[Piece]:
        """Pieces of the primal projection on ``indices``; static runs dropped, equal runs merged."""
        idx = list(indices)
        out: list[Piece] = []
        for p in self.pieces:
            K = frozenset(i for i, k in enumerate(idx) if k in p.K)
            if not K:
                continue
            if out and out[-1].K == K and out[-1].hi == p.lo:
                out[-1] = Piece(out[-1].lo, p.hi, K)
            else:
                out.append(Piece(p.lo, p.hi, K))
        return out

    def projected_points(self, indices: Sequence[int]) -> list[TropPoint]:
        pieces = self.project(indices)
        if not pieces:
            return []
        lams = [pieces[0].lo] + [p.hi for p in pieces]
        pts = []
        for lam in lams:
            full = _full_vector(self.r, lam)
            pts.append(TropPoint(full[k] for k in indices))
        return pts


class BreakpointError(RuntimeError):
    """Local linearity failed on a certification cell."""


def breakpoints(r: int, lo, hi) -> BreakpointDecomposition:
    """Exact piece decomposition of the tropical central path on [lo, hi].

    The path is sampled on the grid of step 2^{-r}; each cell is certified
    linear by a midpoint check, and its slope must be a 0/1 indicator on the
    primal coordinates with the complementary indicator on the dual ones.
    """
    _check_r(r)
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        raise ValueError("lambda_lo must not exceed lambda_hi")
    h = Fraction(1, 2 ** r)
    grid = {lo, hi}
    k = math.ceil(lo / h)
    while k * h < hi:
        grid.add(k * h)
        k += 1
    grid = sorted(grid)
    N = 5 * r - 1
    pieces: list[Piece] = []
    vals = {g: _full_vector(r, g) for g in grid}
    for a, b in zip(grid, grid[1:]):
        fa, fb = vals[a], vals[b]
        fm = _full_vector(r, (a + b) / 2)
        if any(2 * m != u + v for u, v, m in zip(fa, fb, fm)):
            raise BreakpointError(f"path is not linear on [{a}, {b}]")
        slope = [(v - u) / (b - a) for u, v in zip(fa, fb)]
        K = frozenset(i for i in range(N) if slope[i] == 1)
        for i in range(N):
            if slope[i] not in (0, 1) or slope[N + i] != 1 - slope[i]:
                raise BreakpointError(f"non-indicator slope on [{a}, {b}] at coordinate {i}")
        if pieces and pieces[-1].K == K:
            pieces[-1] = Piece(pieces[-1].lo, b, K)
        else:
            pieces.append(Piece(a, b, K))
    return BreakpointDecomposition(r, lo, hi, tuple(pieces))


def last_pair(r: int) -> tuple[int, int]:
    return (2 * r - 2, 2 * r - 1)


def gamma(r: int, lo=0, hi=2, project: Sequence[int] | None = None) -> int:
    """Minimal number of tropical segments covering the path on [lo, hi]."""
    dec = breakpoints(r, lo, hi)
    if project is None:
        sets = dec.full_direction_sets()
    else:
        sets = [p.K for p in dec.project(project)]
    if not sets:
        return 0
    return _gamma_of_sets(sets)


def gamma_count(dec: BreakpointDecomposition, project: Sequence[int] | None = None) -> int:
    sets = dec.full_direction_sets() if project is None else [p.K for p in dec.project(project)]
    return _gamma_of_sets(sets)


# ---------------------------------------------------------------- curvature

def curvature_grid(r: int) -> list[Fraction]:
    """lambda_k = 4k / 2^{r-1} for k = 0..2^{r-2} (r >= 2)."""
    if r < 2:
        raise ValueError("the curvature grid needs r >= 2")
    return [Fraction(4 * k, 2 ** (r - 1)) for k in range(2 ** (r - 2) + 1)]


def trop_curvature_angles(r: int, grid: Sequence) -> list[Angle]:
    grid = [Fraction(g) for g in grid]
    if len(grid) < 2:
        raise ValueError("grid needs at least two points")
    if any(a >= b for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    pts = [trop_path_point(r, g).full() for g in grid]
    return [weak_tropical_angle(U, V, W) for U, V, W in zip(pts, pts[1:], pts[2:])]


def trop_curvature_lower_bound(r: int, grid: Sequence | None = None) -> Angle:
    """Sum of weak tropical angles along the grid, as an exact multiple of pi/2."""
    grid = curvature_grid(r) if grid is None else grid
    total = Angle(0)
    for a in trop_curvature_angles(r, grid):
        total = total + a
    return total


# -------------------------------------------------------- small constants

def epsilon0(r: int) -> Fraction:
    if r < 2:
        raise ValueError("epsilon0 is defined for r >= 2")
    return Fraction(1, 3 * 2 ** (r - 1))


def min_vertex_gap(r: int, lo=0, hi=2) -> Fraction:
    """Smallest d_inf distance between distinct vertices of the path on [lo, hi]."""
    lams = breakpoints(r, lo, hi).lambdas
    pts = [trop_path_point(r, l).full() for l in lams]
    return min(dinf_distance(p, q) for i, p in enumerate(pts) for q in pts[i + 1:])


# -------------------------------------------------------- sampling oracle

_NEG_INF = float("-inf")


class SublevelSampler:
    """Random points (x, w, s, y) of the tropical primal/dual systems with tgap <= lam.

    Built directly from the sign pattern of the LW rows and columns,
    independently of the path recursion.  Each primal row requires
    ``max(pos(x), w_i) = rhs(x)``; each dual column requires
    ``max(s_k, neg(y)) = max(c_k, pos(y))``; ``x_1 <= lam``.  Bounds
    ``s_k <= lam - x_k`` and ``y_i <= lam - w_i`` keep the gap at most lam.
    Values are integers scaled by ``scale`` with ``-inf`` for BOTTOM.
    """

    def __init__(self, r: int, lam, *, p_hit: float = 0.5, p_bottom: float = 0.02):
        self.r = r
        self.lam = Fraction(lam)
        lp = build_lw(r)
        self.n, self.m = lp.n, lp.m
        self.scale = math.lcm(2 ** r, self.lam.denominator)
        D = self.scale

        def sc(v):
            return _NEG_INF if v is BOTTOM else int(v * D)

        self.L = sc(self.lam)
        ent = [[(sc(val(a)), a.sign()) for a in row] for row in lp.A.entries]
        n, m = self.n, self.m
        # primal: for column k, rows where x_k is on the positive side
        self.row_neg = [[(k, ent[i][k][0]) for k in range(n)
                         if not lp.A.entries[i][k].is_zero() and ent[i][k][1] < 0] for i in range(m)]
        self.row_pos = [[(k, ent[i][k][0]) for k in range(n)
                         if not lp.A.entries[i][k].is_zero() and ent[i][k][1] > 0] for i in range(m)]
        self.b = [sc(val(v)) for v in lp.b]
        self.c = [sc(val(v)) for v in lp.c]
        self.col_pos = [[(i, ent[i][k][0]) for i in range(m)
                         if not lp.A.entries[i][k].is_zero() and ent[i][k][1] > 0] for k in range(n)]
        self.col_neg = [[(i, ent[i][k][0]) for i in range(m)
                         if not lp.A.entries[i][k].is_zero() and ent[i][k][1] < 0] for k in range(n)]
        self.x_rows = [[(i, e) for i in range(m) for kk, e in self.row_pos[i] if kk == k]
                       for k in range(n)]
        self.y_cols = [[(k, e) for k in range(n) for ii, e in self.col_neg[k] if ii == i]
                       for i in range(m)]
        self.p_hit, self.p_bottom = p_hit, p_bottom
        self.spread = 4 * D

    def _below(self, rng, bound, p_bottom):
        if bound == _NEG_INF:
            return bound
        u = rng.random()
        if u < p_bottom:
            return _NEG_INF
        if u < p_bottom + self.p_hit:
            return bound
        return bound - rng.randint(1, self.spread)

    def _rhs(self, i, x):
        acc = self.b[i]
        for kk, e in self.row_neg[i]:
            v = e + x[kk]
            if v > acc:
                acc = v
        return acc

    def _R(self, k, y):
        acc = self.c[k]
        for ii, e in self.col_pos[k]:
            v = e + y[ii]
            if v > acc:
                acc = v
        return acc

    def draw_raw(self, rng: random.Random, max_tries: int = 1000) -> list:
        n, m = self.n, self.m
        for _ in range(max_tries):
            x = [None] * n
            for k in range(n):
                bound = self.L if k == 0 else math.inf
                for i, e in self.x_rows[k]:
                    cand = self._rhs(i, x) - e
                    if cand < bound:
                        bound = cand
                x[k] = self._below(rng, bound, self.p_bottom)
            w = []
            for i in range(m):
                rhs = self._rhs(i, x)
                pos = max((e + x[k] for k, e in self.row_pos[i]), default=_NEG_INF)
                w.append(rhs if pos < rhs else self._below(rng, rhs, 0.0))
            y = [None] * m
            for i in range(m):
                bound = self.L - w[i] if w[i] != _NEG_INF else math.inf
                for k, e in self.y_cols[i]:
                    cand = self._R(k, y) - e
                    if cand < bound:
                        bound = cand
                if bound == math.inf:
                    break
                y[i] = self._below(rng, bound, self.p_bottom)
            else:
                s = []
                for k in range(n):
                    R = self._R(k, y)
                    neg = max((e + y[i] for i, e in self.col_neg[k]), default=_NEG_INF)
                    cap = self.L - x[k] if x[k] != _NEG_INF else math.inf
                    if neg < R:
                        if R > cap:
                            break
                        s.append(R)
                    else:
                        s.append(self._below(rng, min(R, cap), self.p_bottom))
                else:
                    return x + w + s + y
        raise RuntimeError("rejection sampler exhausted its budget")

    def to_point(self, raw: Sequence) -> TropPoint:
        return TropPoint(BOTTOM if v == _NEG_INF else Fraction(v, self.scale) for v in raw)

    def scaled(self, point: TropPoint) -> list:
        return [_NEG_INF if v is BOTTOM else int(v * self.scale) for v in point]

    def draw(self, rng: random.Random) -> TropPoint:
        return self.to_point(self.draw_raw(rng))


def sample_sublevel_point(r: int, lam, rng: random.Random, **kw) -> TropPoint:
    return SublevelSampler(r, lam, **kw).draw(rng)


def barycenter_check(r: int, lam, count: int, rng: random.Random) -> tuple[int, list]:
    """Draw ``count`` sublevel samples; return (violations, barycenter of samples ∪ {path point})."""
    sampler = SublevelSampler(r, lam)
    target = sampler.scaled(trop_path_point(r, lam).full())
    bary = list(target)
    bad = 0
    for _ in range(count):
        z = sampler.draw_raw(rng)
        if any(a > b for a, b in zip(z, target)):
            bad += 1
        bary = [a if a >= b else b for a, b in zip(bary, z)]
    return bad, sampler.to_point(bary)


def full_tgap(r: int, z: TropPoint):
    n, m = 2 * r, 3 * r - 1
    e = list(z)
    return tgap(e[:n], e[n + m:2 * n + m], e[n:n + m], e[2 * n + m:])
