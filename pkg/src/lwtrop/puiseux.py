"""Finite Puiseux series with rational exponents and monomial matrices.

A series is a finite sum ``sum q_i t^{a_i}`` with nonzero ``Fraction``
coefficients and strictly decreasing ``Fraction`` exponents.  Series are
ordered by their eventual sign as ``t -> inf``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2

from .tropical import BOTTOM, Scalar

DEFAULT_ETA_LIMIT = 12


class PrecisionError(ArithmeticError):
    """Raised when the configured floating point format cannot hold a value."""


def _frac(v) -> Fraction:
    if isinstance(v, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(v, float):
        raise TypeError("exponents and coefficients must be exact, got a float")
    return Fraction(v)


@dataclass(frozen=True)
class PuiseuxSeries:
    terms: tuple  # ((coef, exp), ...) with exp strictly decreasing

    def __init__(self, terms: Iterable = ()):
        acc: dict[Fraction, Fraction] = {}
        for coef, exp in terms:
            c, e = _frac(coef), _frac(exp)
            acc[e] = acc.get(e, Fraction(0)) + c
        cleaned = tuple(sorted(((c, e) for e, c in acc.items() if c != 0),
                               key=lambda ce: ce[1], reverse=True))
        object.__setattr__(self, "terms", cleaned)

    @classmethod
    def monomial(cls, coef=1, exp=0) -> "PuiseuxSeries":
        return cls([(coef, exp)])

    @classmethod
    def constant(cls, c) -> "PuiseuxSeries":
        return cls([(c, 0)])

    @classmethod
    def coerce(cls, v) -> "PuiseuxSeries":
        if isinstance(v, PuiseuxSeries):
            return v
        return cls.constant(v)

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    @property
    def leading(self) -> tuple:
        if not self.terms:
            raise ValueError("zero series has no leading term")
        return self.terms[0]

    def sign(self) -> int:
        if not self.terms:
            return 0
        return 1 if self.terms[0][0] > 0 else -1

    def __add__(self, other):
        other = PuiseuxSeries.coerce(other)
        return PuiseuxSeries(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries((-c, e) for c, e in self.terms)

    def __sub__(self, other):
        return self + (-PuiseuxSeries.coerce(other))

    def __rsub__(self, other):
        return PuiseuxSeries.coerce(other) - self

    def __mul__(self, other):
        other = PuiseuxSeries.coerce(other)
        return PuiseuxSeries(
            (c1 * c2, e1 + e2) for (c1, e1), (c2, e2) in itertools.product(self.terms, other.terms)
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            try:
                other = PuiseuxSeries.coerce(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __lt__(self, other):
        return series_cmp(self, other) == "<"

    def __le__(self, other):
        return series_cmp(self, other) != ">"

    def __gt__(self, other):
        return series_cmp(self, other) == ">"

    def __ge__(self, other):
        return series_cmp(self, other) != "<"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for c, e in self.terms:
            if e == 0:
                parts.append(f"{c}")
            else:
                parts.append(f"{c}*t^({e})")
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {"terms": [{"coef": str(c), "exp": str(e)} for c, e in self.terms]}

    @classmethod
    def from_json(cls, data) -> "PuiseuxSeries":
        if isinstance(data, str):
            data = json.loads(data)
        return cls((Fraction(d["coef"]), Fraction(d["exp"])) for d in data["terms"])


def val(f) -> Scalar:
    """Leading exponent of ``f``; BOTTOM for the zero series."""
    f = PuiseuxSeries.coerce(f)
    if f.is_zero():
        return BOTTOM
    return f.terms[0][1]


def series_add(f, g) -> PuiseuxSeries:
    return PuiseuxSeries.coerce(f) + g


def series_mul(f, g) -> PuiseuxSeries:
    return PuiseuxSeries.coerce(f) * g


def series_cmp(f, g) -> str:
    """'<', '=' or '>' according to the sign of ``f - g`` for large t."""
    d = PuiseuxSeries.coerce(f) - PuiseuxSeries.coerce(g)
    return {-1: "<", 0: "=", 1: ">"}[d.sign()]


def power_of_t(t, exp: Fraction):
    """``t**exp`` in the current gmpy2 context, exact for dyadic roots of exact t."""
    exp = Fraction(exp)
    if exp == 0:
        return gmpy2.mpfr(1)
    root = gmpy2.rootn(t, exp.denominator) if exp.denominator != 1 else gmpy2.mpfr(t)
    return root ** exp.numerator


def _check_range(t, exps: Iterable[Fraction]) -> None:
    ctx = gmpy2.get_context()
    lg = float(gmpy2.log2(t))
    for e in exps:
        need = abs(float(e)) * abs(lg) + 64
        if need >= ctx.emax:
            raise PrecisionError(
                f"t^{e} needs about {need:.0f} exponent bits; the format allows {ctx.emax}")


def evaluate(f, t, precision_bits: int = 256):
    """``f(t)`` as an mpfr with ``precision_bits`` of mantissa."""
    if precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")
    f = PuiseuxSeries.coerce(f)
    with gmpy2.context(precision=precision_bits):
        tt = gmpy2.mpfr(t)
        if tt <= 0:
            raise ValueError("evaluation point must be positive")
        _check_range(tt, (e for _, e in f.terms))
        total = gmpy2.mpfr(0)
        for c, e in f.terms:
            term = power_of_t(tt, e) * c.numerator / c.denominator
            if gmpy2.is_infinite(term):
                raise PrecisionError(f"overflow evaluating t^{e}")
            total += term
        return total


# ---------------------------------------------------------------- matrices

@dataclass(frozen=True)
class MonomialMatrix:
    """Matrix whose entries are zero or a single signed monomial."""

    entries: tuple  # tuple of row tuples of PuiseuxSeries

    def __init__(self, rows: Sequence[Sequence]):
        conv = []
        width = None
        for row in rows:
            r = tuple(PuiseuxSeries.coerce(v) for v in row)
            if width is None:
                width = len(r)
            elif len(r) != width:
                raise ValueError("ragged matrix")
            for v in r:
                if len(v.terms) > 1:
                    raise ValueError(f"entry {v} is not a monomial")
            conv.append(r)
        object.__setattr__(self, "entries", tuple(conv))

    @property
    def shape(self) -> tuple[int, int]:
        rows = len(self.entries)
        return rows, (len(self.entries[0]) if rows else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def exponent(self, i, j) -> Scalar:
        return val(self.entries[i][j])

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "MonomialMatrix":
        return MonomialMatrix([[self.entries[i][j] for j in cols] for i in rows])

    def transpose(self) -> "MonomialMatrix":
        m, n = self.shape
        return MonomialMatrix([[self.entries[i][j] for i in range(m)] for j in range(n)])

    def evaluate(self, t, precision_bits: int = 256) -> list[list]:
        return [[evaluate(v, t, precision_bits) for v in row] for row in self.entries]

    def unit_coefficients(self) -> bool:
        return all(v.is_zero() or abs(v.terms[0][0]) == 1 for row in self.entries for v in row)

    def to_json(self) -> list:
        return [[v.to_json() if not v.is_zero() else 0 for v in row] for row in self.entries]


def _check_square(M: MonomialMatrix, limit: int) -> int:
    m, n = M.shape
    if m != n:
        raise ValueError(f"matrix must be square, got {m}x{n}")
    if m > limit:
        raise ValueError(f"order {m} exceeds the enumeration limit {limit}")
    return m


def _permutation_sums(M: MonomialMatrix) -> list[tuple[Fraction, Fraction]]:
    """(exponent sum, signed coefficient product) of every nonvanishing permutation."""
    d = M.shape[0]
    out = []
    for perm in itertools.permutations(range(d)):
        coef = Fraction(1)
        exp = Fraction(0)
        for i, j in enumerate(perm):
            v = M.entries[i][j]
            if v.is_zero():
                break
            c, e = v.terms[0]
            coef *= c
            exp += e
        else:
            inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
            out.append((exp, -coef if inversions % 2 else coef))
    return out


def eta(M: MonomialMatrix, limit: int = DEFAULT_ETA_LIMIT):
    """Smallest positive gap between exponent sums of permutations; ``inf`` if none."""
    _check_square(M, limit)
    sums = sorted({e for e, _ in _permutation_sums(M)})
    gaps = [b - a for a, b in zip(sums, sums[1:])]
    return min(gaps) if gaps else math.inf


def det_series(M: MonomialMatrix, limit: int = DEFAULT_ETA_LIMIT) -> PuiseuxSeries:
    """Exact determinant by permutation expansion."""
    _check_square(M, limit)
    if M.shape[0] == 0:
        return PuiseuxSeries.constant(1)
    return PuiseuxSeries((c, e) for e, c in _permutation_sums(M))


@dataclass(frozen=True)
class DetLogBracket:
    lower: float
    upper: float
    val_det: Scalar
    guaranteed: bool
    threshold: float  # (d!)^{1/eta}


def det_log_bounds(M: MonomialMatrix, t, limit: int = DEFAULT_ETA_LIMIT) -> DetLogBracket:
    """Bracket ``val(det M) ± log_t d!`` for ``log_t |det M(t)|``.

    The guarantee needs ``t >= (d!)^{1/eta(M)}`` and unit coefficients.
    """
    d = _check_square(M, limit)
    t = float(t)
    if t <= 1:
        raise ValueError("t must exceed 1")
    D = det_series(M, limit)
    vd = val(D)
    e = eta(M, limit)
    thr = 1.0 if e == math.inf else math.factorial(d) ** (1.0 / float(e))
    if vd is BOTTOM:
        return DetLogBracket(-math.inf, -math.inf, BOTTOM, True, thr)
    slack = math.log(math.factorial(d)) / math.log(t)
    guaranteed = t >= thr and M.unit_coefficients()
    return DetLogBracket(float(vd) - slack, float(vd) + slack, vd, guaranteed, thr)


def bordered_matrix(A: MonomialMatrix, b: Sequence) -> MonomialMatrix:
    """``[[A, b, 0], [e^T, 0, 1]]``."""
    m, n = A.shape
    if len(b) != m:
        raise ValueError("b has the wrong length")
    rows = [list(A.entries[i]) + [PuiseuxSeries.coerce(b[i]), PuiseuxSeries()] for i in range(m)]
    rows.append([PuiseuxSeries.constant(1)] * n + [PuiseuxSeries(), PuiseuxSeries.constant(1)])
    return MonomialMatrix(rows)


def eta0(A: MonomialMatrix, b: Sequence, *, order: int | None = None,
         analytic_bound=None, limit: int = DEFAULT_ETA_LIMIT):
    """Minimum of ``eta`` over square submatrices of the bordered matrix.

    ``order`` defaults to ``n + 1`` (the column count of ``[A b]``), capped by
    the row count.  When enumeration is over ``limit`` the caller must pass a
    known ``analytic_bound``.  ``inf`` means no constraint.
    """
    m, n = A.shape
    B = bordered_matrix(A, b)
    rows, cols = B.shape
    d = min(n + 1, rows) if order is None else order
    if d > limit:
        if analytic_bound is None:
            raise ValueError(f"order {d} exceeds limit {limit} and no analytic bound given")
        return Fraction(analytic_bound)
    best = math.inf
    for R in itertools.combinations(range(rows), d):
        for C in itertools.combinations(range(cols), d):
            e = eta(B.submatrix(R, C), limit)
            if e < best:
                best = e
    return best


def lw_eta0_bound(r: int) -> Fraction:
    """Certified lower bound ``1/2^{r-1}`` on eta0 for the LW family."""
    if r < 1:
        raise ValueError("r must be positive")
    return Fraction(1, 2 ** (r - 1))
