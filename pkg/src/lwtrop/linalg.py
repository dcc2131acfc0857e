"""Dense linear solves in gmpy2 multiprecision arithmetic.

Gaussian elimination with row equilibration and partial pivoting, followed
by one step of iterative refinement whose residual is accumulated at twice
the working precision.
"""

from __future__ import annotations

import gmpy2


class SingularSystemError(ArithmeticError):
    """The matrix is singular at working precision."""


def lu_solve(M, rhs, precision_bits: int):
    """Solve ``M z = rhs``.  ``M`` is a list of rows; inputs are not modified."""
    n = len(M)
    if any(len(row) != n for row in M) or len(rhs) != n:
        raise ValueError("system must be square")
    with gmpy2.context(precision=precision_bits):
        zero = gmpy2.mpfr(0)
        # equilibrate rows so pivot choice is scale invariant
        scale = []
        for row in M:
            big = max((abs(v) for v in row), default=zero)
            if big == 0:
                raise SingularSystemError("zero row")
            scale.append(1 / big)
        a = [[v * sc for v in row] for row, sc in zip(M, scale)]
        b = [v * sc for v, sc in zip(rhs, scale)]
        z = _eliminate(a, b, n)
        # one refinement step; residual at doubled precision
        with gmpy2.context(precision=2 * precision_bits):
            res = []
            for row, bi, sc in zip(M, rhs, scale):
                acc = gmpy2.mpfr(bi)
                for v, zj in zip(row, z):
                    if v:
                        acc -= v * zj
                res.append(acc * sc)
        a = [[v * sc for v in row] for row, sc in zip(M, scale)]
        dz = _eliminate(a, [gmpy2.mpfr(v) for v in res], n)
        return [zi + di for zi, di in zip(z, dz)]


def _eliminate(a, b, n):
    perm_rows = a
    for col in range(n):
        piv = max(range(col, n), key=lambda i: abs(perm_rows[i][col]))
        if perm_rows[piv][col] == 0:
            raise SingularSystemError(f"no pivot in column {col}")
        if piv != col:
            perm_rows[col], perm_rows[piv] = perm_rows[piv], perm_rows[col]
            b[col], b[piv] = b[piv], b[col]
        prow = perm_rows[col]
        inv = 1 / prow[col]
        nz = [j for j in range(col + 1, n) if prow[j]]
        for i in range(col + 1, n):
            row = perm_rows[i]
            f = row[col]
            if not f:
                continue
            f = f * inv
            for j in nz:
                row[j] -= f * prow[j]
            b[i] -= f * b[col]
    z = [None] * n
    for i in range(n - 1, -1, -1):
        row = perm_rows[i]
        acc = b[i]
        for j in range(i + 1, n):
            if row[j]:
                acc -= row[j] * z[j]
        z[i] = acc / row[i]
    return z
