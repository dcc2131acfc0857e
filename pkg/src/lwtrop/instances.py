"""The LW(r, t) family in slack form, its dual, numeric evaluation and warm starts.

Rows are ordered w_1, w_2, then (w_{3j}, w_{3j+1}, w_{3j+2}) for j = 1..r-1:

    x_1 + w_1 = t^2
    x_2 + w_2 = t
    x_{2j+1} - t x_{2j-1} + w_{3j} = 0
    x_{2j+1} - t x_{2j}   + w_{3j+1} = 0
    x_{2j+2} - t^{1-1/2^j} (x_{2j-1} + x_{2j}) + w_{3j+2} = 0

Indices in docstrings are 1-based; Python containers are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .puiseux import MonomialMatrix, PuiseuxSeries, evaluate, power_of_t, val
from .tropical import BOTTOM


def _mono(coef, exp) -> PuiseuxSeries:
    return PuiseuxSeries.monomial(coef, exp)


ZERO = PuiseuxSeries()
ONE = PuiseuxSeries.constant(1)


@dataclass(frozen=True)
class LWSpec:
    r: int

    def __post_init__(self):
        if not isinstance(self.r, int) or self.r < 1:
            raise ValueError(f"r must be an integer >= 1, got {self.r!r}")

    @property
    def n(self) -> int:
        return 2 * self.r

    @property
    def m(self) -> int:
        return 3 * self.r - 1

    @property
    def N(self) -> int:
        return 5 * self.r - 1


@dataclass(frozen=True)
class SlackLP:
    r: int
    A: MonomialMatrix
    b: tuple
    c: tuple

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return self.n + self.m

    def to_json(self) -> dict:
        return {
            "r": self.r, "n": self.n, "m": self.m,
            "A": self.A.to_json(),
            "b": [v.to_json() if not v.is_zero() else 0 for v in self.b],
            "c": [v.to_json() if not v.is_zero() else 0 for v in self.c],
        }


def row_index(kind: int, j: int = 0) -> int:
    """0-based row of slack w_{kind} (kind in {1,2}) or w_{3j+kind} (kind in {0,1,2}, j>=1)."""
    if j == 0:
        if kind not in (1, 2):
            raise ValueError("top rows are w_1 and w_2")
        return kind - 1
    return 3 * j + kind - 1


def layer_of_row(i: int) -> int:
    """Block index j of a 0-based row (0 for w_1, w_2)."""
    return 0 if i < 2 else (i + 1) // 3


def build_lw(spec: LWSpec | int) -> SlackLP:
    if isinstance(spec, int):
        spec = LWSpec(spec)
    r, n, m = spec.r, spec.n, spec.m
    A = [[ZERO] * n for _ in range(m)]
    b = [ZERO] * m
    A[0][0] = ONE
    b[0] = _mono(1, 2)
    A[1][1] = ONE
    b[1] = _mono(1, 1)
    for j in range(1, r):
        odd, even = 2 * j - 2, 2 * j - 1  # x_{2j-1}, x_{2j}
        nxt_odd, nxt_even = 2 * j, 2 * j + 1  # x_{2j+1}, x_{2j+2}
        i0, i1, i2 = row_index(0, j), row_index(1, j), row_index(2, j)
        A[i0][nxt_odd] = ONE
        A[i0][odd] = _mono(-1, 1)
        A[i1][nxt_odd] = ONE
        A[i1][even] = _mono(-1, 1)
        e = 1 - Fraction(1, 2 ** j)
        A[i2][nxt_even] = ONE
        A[i2][odd] = _mono(-1, e)
        A[i2][even] = _mono(-1, e)
    c = [ONE] + [ZERO] * (n - 1)
    return SlackLP(r, MonomialMatrix(A), tuple(b), tuple(c))


def inequality_form(spec: LWSpec | int):
    """``(A, b)`` of the 3r+1 inequalities ``A x <= b`` (nonnegativity of x_{2r-1}, x_{2r} last)."""
    lp = build_lw(spec)
    rows = [list(row) for row in lp.A.entries]
    b = list(lp.b)
    n = lp.n
    for k in (n - 2, n - 1):
        rows.append([_mono(-1, 0) if i == k else ZERO for i in range(n)])
        b.append(ZERO)
    return MonomialMatrix(rows), tuple(b)


def tropical_inequalities(spec: LWSpec | int) -> list[str]:
    """Tropicalized primal inequalities in x, rendered as text, one per row."""
    lp = build_lw(spec)
    out = []
    for i, row in enumerate(lp.A.entries):
        pos = [(k, val(v)) for k, v in enumerate(row) if not v.is_zero() and v.sign() > 0]
        neg = [(k, val(v)) for k, v in enumerate(row) if not v.is_zero() and v.sign() < 0]
        lhs = " ⊕ ".join(_term(e, k) for k, e in pos)
        rhs_terms = [_term(e, k) for k, e in neg]
        if val(lp.b[i]) is not BOTTOM:
            rhs_terms.append(str(val(lp.b[i])))
        out.append(f"{lhs} <= {' ⊕ '.join(rhs_terms)}")
    return out


def _term(e, k) -> str:
    return f"x{k + 1}" if e == 0 else f"{e}+x{k + 1}"


@dataclass(frozen=True)
class DualData:
    At: MonomialMatrix
    b: tuple
    c: tuple

    def residual(self, s, y) -> list:
        """``s - A^T y - c`` for exact inputs."""
        n, m = self.At.shape
        out = []
        for k in range(n):
            acc = PuiseuxSeries.coerce(s[k]) - self.c[k]
            for i in range(m):
                acc = acc - self.At[k, i] * y[i]
            out.append(acc)
        return out


def dual_lp(lp: SlackLP) -> DualData:
    return DualData(lp.A.transpose(), lp.b, lp.c)


@dataclass(frozen=True)
class OptimalData:
    value: Fraction
    s: tuple
    y: tuple


def optimal_data(lp: SlackLP) -> OptimalData:
    s = (Fraction(1),) + (Fraction(0),) * (lp.n - 1)
    y = (Fraction(0),) * lp.m
    return OptimalData(Fraction(0), s, y)


# ------------------------------------------------------------------ numeric

@dataclass(frozen=True)
class RealLP:
    r: int
    A: tuple  # rows of mpfr
    b: tuple
    c: tuple
    t: object
    precision_bits: int

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def N(self) -> int:
        return self.n + self.m

    def context(self):
        return gmpy2.context(precision=self.precision_bits)


def evaluate_lp(lp: SlackLP, t, precision_bits: int) -> RealLP:
    with gmpy2.context(precision=precision_bits):
        tt = gmpy2.mpfr(t)
        if tt <= 1:
            raise ValueError("t must exceed 1")
    A = tuple(tuple(evaluate(v, tt, precision_bits) for v in row) for row in lp.A.entries)
    b = tuple(evaluate(v, tt, precision_bits) for v in lp.b)
    c = tuple(evaluate(v, tt, precision_bits) for v in lp.c)
    with gmpy2.context(precision=precision_bits):
        tt = gmpy2.mpfr(t)
    return RealLP(lp.r, A, b, c, tt, precision_bits)


def matvec(A, x):
    return [sum((a * xi for a, xi in zip(row, x)), gmpy2.mpfr(0)) for row in A]


def rmatvec(A, y):
    n = len(A[0])
    return [sum((A[i][k] * y[i] for i in range(len(A))), gmpy2.mpfr(0)) for k in range(n)]


class WarmStartError(ArithmeticError):
    """The constructed point is not strictly feasible at this t."""


def tropical_warm_start(spec: LWSpec | int, t, lam, precision_bits: int):
    """Strictly feasible point whose log_t image is close to the tropical central path at lam.

    Primal: x_{2j+1}, x_{2j+2} = 2^{-(j+1)} t^{x^lam}, w from the equalities.
    Dual: y_i = 4^{-layer(i)} t^{y^lam_i} and s = c + A^T y.  The layer
    weights make every column of ``s`` dominated by its positive terms.
    Returns ``(x, w, s, y)`` as lists of mpfr.
    """
    from .trop_path import trop_path_point  # local import to avoid a cycle

    if isinstance(spec, int):
        spec = LWSpec(spec)
    lam = Fraction(lam)
    if lam < 0:
        raise ValueError("lambda_start must be nonnegative")
    lp = evaluate_lp(build_lw(spec), t, precision_bits)
    point = trop_path_point(spec.r, lam)
    with lp.context():
        tt = lp.t
        x = []
        for k, e in enumerate(point.x):
            j = k // 2
            x.append(power_of_t(tt, e) / 2 ** (j + 1))
        Ax = matvec(lp.A, x)
        w = [bi - ai for bi, ai in zip(lp.b, Ax)]
        y = [power_of_t(tt, e) / 4 ** layer_of_row(i) for i, e in enumerate(point.y)]
        Aty = rmatvec(lp.A, y)
        s = [ci + v for ci, v in zip(lp.c, Aty)]
        for name, vec in (("x", x), ("w", w), ("s", s), ("y", y)):
            for k, v in enumerate(vec):
                if not v > 0:
                    raise WarmStartError(f"{name}[{k}] = {v} is not positive at t={t}")
    return x, w, s, y


def min_warm_start_t(spec: LWSpec | int, lam, *, t0: int = 2, max_doublings: int = 64,
                     precision_bits: int = 256) -> int:
    """Smallest power-of-two multiple of ``t0`` at which the warm start is strictly feasible."""
    t = t0
    for _ in range(max_doublings):
        try:
            tropical_warm_start(spec, t, lam, precision_bits)
            return t
        except WarmStartError:
            t *= 2
    raise WarmStartError(f"no feasible warm start up to t={t}")
