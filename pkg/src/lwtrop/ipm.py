"""Primal-dual log-barrier interior point methods in multiprecision arithmetic.

Points are ``z = (x, w, s, y)`` for ``min <c,x>`` subject to ``A x + w = b``
with dual ``s - A^T y = c``; all four blocks stay strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2

from .instances import RealLP, matvec, rmatvec, tropical_warm_start
from .linalg import lu_solve


class NeighborhoodError(RuntimeError):
    """An iterate left the wide neighborhood (bug guard)."""


class ConvergenceError(ArithmeticError):
    """Newton or the outer loop failed to converge within its budget."""


@dataclass(frozen=True)
class PDPoint:
    x: tuple
    w: tuple
    s: tuple
    y: tuple
    precision_bits: int

    def __init__(self, x, w, s, y, precision_bits: int):
        if len(x) != len(s) or len(w) != len(y):
            raise ValueError("inconsistent block dimensions")
        with gmpy2.context(precision=precision_bits):
            blocks = [tuple(gmpy2.mpfr(v) for v in blk) for blk in (x, w, s, y)]
        for name, blk in zip("xwsy", blocks):
            if any(not v > 0 for v in blk):
                raise ValueError(f"block {name} is not strictly positive")
        object.__setattr__(self, "x", blocks[0])
        object.__setattr__(self, "w", blocks[1])
        object.__setattr__(self, "s", blocks[2])
        object.__setattr__(self, "y", blocks[3])
        object.__setattr__(self, "precision_bits", precision_bits)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def m(self) -> int:
        return len(self.w)

    @property
    def N(self) -> int:
        return self.n + self.m

    def products(self) -> list:
        with gmpy2.context(precision=self.precision_bits):
            return [a * b for a, b in zip(self.x, self.s)] + [a * b for a, b in zip(self.w, self.y)]

    @property
    def mu_bar(self):
        return duality_measure(self)

    def flat(self) -> list:
        return list(self.x) + list(self.w) + list(self.s) + list(self.y)

    def log_t(self, t) -> list[float]:
        with gmpy2.context(precision=self.precision_bits):
            lt = gmpy2.log(gmpy2.mpfr(t))
            return [float(gmpy2.log(v) / lt) for v in self.flat()]


def duality_measure(z: PDPoint):
    with gmpy2.context(precision=z.precision_bits):
        return sum(z.products(), gmpy2.mpfr(0)) / z.N


def _mp(v):
    if isinstance(v, Fraction):
        return gmpy2.mpfr(v.numerator) / v.denominator
    return gmpy2.mpfr(v)


def in_wide_neighborhood(z: PDPoint, theta) -> bool:
    """Every complementarity product is at least (1 - theta) times the duality measure."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    with gmpy2.context(precision=z.precision_bits):
        prods = z.products()
        floor = sum(prods, gmpy2.mpfr(0)) / z.N * (1 - _mp(theta))
        return all(p >= floor for p in prods)


def _combine(z: PDPoint, d: "NewtonDirection", alpha) -> list:
    with gmpy2.context(precision=z.precision_bits):
        return [[a + alpha * b for a, b in zip(zb, db)]
                for zb, db in ((z.x, d.dx), (z.w, d.dw), (z.s, d.ds), (z.y, d.dy))]


def _positive_and_in(z: PDPoint, d: "NewtonDirection", alpha, theta) -> bool:
    blocks = _combine(z, d, alpha)
    with gmpy2.context(precision=z.precision_bits):
        for blk in blocks:
            if any(not v > 0 for v in blk):
                return False
        x, w, s, y = blocks
        prods = [a * b for a, b in zip(x, s)] + [a * b for a, b in zip(w, y)]
        mu = sum(prods, gmpy2.mpfr(0)) / len(prods)
        floor = mu * (1 - _mp(theta))
        return all(p >= floor for p in prods)


def move(z: PDPoint, d: "NewtonDirection", alpha) -> PDPoint:
    return PDPoint(*_combine(z, d, alpha), precision_bits=z.precision_bits)


@dataclass(frozen=True)
class NewtonDirection:
    dx: tuple
    dw: tuple
    ds: tuple
    dy: tuple

    def is_zero(self) -> bool:
        return all(v == 0 for blk in (self.dx, self.dw, self.ds, self.dy) for v in blk)

    def orthogonality(self):
        with gmpy2.context(precision=max(v.precision for v in self.dx)):
            return sum((a * b for a, b in zip(self.dx, self.ds)), gmpy2.mpfr(0)) + sum(
                (a * b for a, b in zip(self.dw, self.dy)), gmpy2.mpfr(0))


def feasibility_residuals(lp: RealLP, z: PDPoint) -> tuple:
    """(b - A x - w, c - s + A^T y) as lists."""
    with lp.context():
        Ax = matvec(lp.A, z.x)
        Aty = rmatvec(lp.A, z.y)
        rp = [bi - ai - wi for bi, ai, wi in zip(lp.b, Ax, z.w)]
        rd = [ci - si + v for ci, si, v in zip(lp.c, z.s, Aty)]
    return rp, rd


def relative_feasibility(lp: RealLP, z: PDPoint) -> tuple[float, float]:
    rp, rd = feasibility_residuals(lp, z)
    with lp.context():
        scale_p = max(max(abs(v) for v in lp.b), max(abs(v) for v in z.w), max(abs(v) for v in z.x))
        scale_d = max(max(abs(v) for v in lp.c), max(abs(v) for v in z.s), max(abs(v) for v in z.y))
        return (float(max(abs(v) for v in rp) / scale_p), float(max(abs(v) for v in rd) / scale_d))


def newton_direction(z: PDPoint, mu_goal, lp: RealLP, *, keep_feasible: bool = True) -> NewtonDirection:
    """Solve the full Newton system on unknowns (dx, dw, ds, dy).

        A dx + dw          = b - A x - w
        ds - A^T dy        = c - s + A^T y
        S dx + X ds        = mu e - x s
        Y dw + W dy        = mu e - w y

    The feasibility right-hand sides vanish for feasible z; they are kept
    (``keep_feasible``) so that rounding drift is corrected each step.
    """
    n, m = z.n, z.m
    prec = z.precision_bits
    size = 2 * (n + m)
    with gmpy2.context(precision=prec):
        mu = gmpy2.mpfr(mu_goal)
        zero = gmpy2.mpfr(0)
        M = [[zero] * size for _ in range(size)]
        rhs = [zero] * size
        ox, ow, os_, oy = 0, n, n + m, 2 * n + m
        if keep_feasible:
            rp, rd = feasibility_residuals(lp, z)
        else:
            rp, rd = [zero] * m, [zero] * n
        for i in range(m):
            row = M[i]
            for k in range(n):
                row[ox + k] = lp.A[i][k]
            row[ow + i] = gmpy2.mpfr(1)
            rhs[i] = rp[i]
        for k in range(n):
            row = M[m + k]
            row[os_ + k] = gmpy2.mpfr(1)
            for i in range(m):
                if lp.A[i][k]:
                    row[oy + i] = -lp.A[i][k]
            rhs[m + k] = rd[k]
        for k in range(n):
            row = M[m + n + k]
            row[ox + k] = z.s[k]
            row[os_ + k] = z.x[k]
            rhs[m + n + k] = mu - z.x[k] * z.s[k]
        for i in range(m):
            row = M[m + 2 * n + i]
            row[ow + i] = z.y[i]
            row[oy + i] = z.w[i]
            rhs[m + 2 * n + i] = mu - z.w[i] * z.y[i]
    sol = lu_solve(M, rhs, prec)
    return NewtonDirection(tuple(sol[ox:ox + n]), tuple(sol[ow:ow + m]),
                           tuple(sol[os_:os_ + n]), tuple(sol[oy:oy + m]))


class StepError(RuntimeError):
    """No positive step keeps the iterate in the neighborhood."""


def step_to(z: PDPoint, d: NewtonDirection, theta, *, rel_tol: float = 1e-3,
            max_bisections: int = 200) -> tuple:
    """Largest alpha in (0, 1] with z + alpha d in the wide neighborhood.

    The admissible set is an interval containing 0, so bisection applies.
    The bracket is shrunk until its width is below ``rel_tol`` times
    ``min(alpha, 1 - alpha)``; the lower (admissible) end is returned.
    """
    if d.is_zero() or _positive_and_in(z, d, 1, theta):
        return 1.0, (z if d.is_zero() else move(z, d, 1))
    lo, hi = 0.0, 1.0
    for _ in range(max_bisections):
        mid = 0.5 * (lo + hi)
        if _positive_and_in(z, d, mid, theta):
            lo = mid
        else:
            hi = mid
        if lo > 0 and hi - lo <= rel_tol * min(lo, 1 - lo):
            break
    if lo <= 0:
        raise StepError("no admissible positive step length")
    return lo, move(z, d, lo)


@dataclass(frozen=True)
class IPMConfig:
    variant: str = "predictor-corrector"
    theta: float = 0.5
    theta_inner: float = 0.25
    sigma: float = 0.1
    sigma_min: float = 0.1
    sigma_max: float = 0.1
    mu_target: float = 1.0
    max_iters: int = 1000
    precision_bits: int = 256
    step_tol: float = 1e-3
    max_corrector: int = 20

    def __post_init__(self):
        if self.variant not in ("long-step", "predictor-corrector"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0 < self.theta_inner < self.theta < 1:
            raise ValueError("need 0 < theta_inner < theta < 1")
        if not 0 < self.sigma_min <= self.sigma_max < 1:
            raise ValueError("need 0 < sigma_min <= sigma_max < 1")
        if not self.sigma_min <= self.sigma <= self.sigma_max:
            object.__setattr__(self, "sigma_min", min(self.sigma_min, self.sigma))
            object.__setattr__(self, "sigma_max", max(self.sigma_max, self.sigma))
            if not 0 < self.sigma < 1:
                raise ValueError("sigma must lie in (0, 1)")


@dataclass
class Step:
    phase: str
    alpha: float
    mu_bar: object


@dataclass
class Trajectory:
    points: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    @property
    def p(self) -> int:
        """Number of segments of the polygonal trajectory."""
        return len(self.points) - 1

    @property
    def iterations(self) -> int:
        """Number of mu-reducing steps (predictor or long steps)."""
        return sum(1 for s in self.steps if s.phase in ("predictor", "long-step"))

    def mu_bars(self) -> list:
        return [duality_measure(z) for z in self.points]


def _check_invariants(z: PDPoint, theta, where: str) -> None:
    if not in_wide_neighborhood(z, theta):
        raise NeighborhoodError(f"iterate left the wide neighborhood after {where}")


def run_ipm(lp: RealLP, config: IPMConfig, z0: PDPoint, *, on_step=None) -> Trajectory:
    """Path following until the duality measure reaches ``config.mu_target``."""
    theta = config.theta
    _check_invariants(z0, theta, "start")
    traj = Trajectory([z0], [])
    z = z0
    with gmpy2.context(precision=z0.precision_bits):
        target = gmpy2.mpfr(config.mu_target)
        sigma = gmpy2.mpfr(config.sigma)
    while duality_measure(z) > target:
        if traj.iterations >= config.max_iters:
            raise ConvergenceError(f"max_iters={config.max_iters} exceeded")
        mu0 = duality_measure(z)
        if config.variant == "long-step":
            with gmpy2.context(precision=z.precision_bits):
                goal = mu0 * sigma
            d = newton_direction(z, goal, lp)
            alpha, z = step_to(z, d, theta, rel_tol=config.step_tol)
            _record(traj, z, "long-step", alpha, theta, on_step)
        else:
            d = newton_direction(z, 0, lp)
            alpha, z = step_to(z, d, theta, rel_tol=config.step_tol)
            _record(traj, z, "predictor", alpha, theta, on_step)
            if duality_measure(z) <= target:
                break
            for _ in range(config.max_corrector):
                if in_wide_neighborhood(z, config.theta_inner):
                    break
                d = newton_direction(z, duality_measure(z), lp)
                if _positive_and_in(z, d, 1, theta):
                    alpha, z = 1.0, move(z, d, 1)
                else:
                    alpha, z = step_to(z, d, theta, rel_tol=config.step_tol)
                _record(traj, z, "corrector", alpha, theta, on_step)
            else:
                raise ConvergenceError("corrector did not re-enter the inner neighborhood")
        if not duality_measure(z) < mu0:
            raise ConvergenceError("duality measure failed to decrease")
    return traj


def _record(traj: Trajectory, z: PDPoint, phase: str, alpha, theta, on_step) -> None:
    _check_invariants(z, theta, phase)
    prev = duality_measure(traj.points[-1])
    mu = duality_measure(z)
    # correctors keep mu_bar fixed up to rounding; never allow growth
    with gmpy2.context(precision=z.precision_bits):
        grew = mu > prev * (1 + gmpy2.mpfr(2) ** (32 - z.precision_bits))
    if grew:
        raise NeighborhoodError(f"duality measure increased during {phase}")
    traj.points.append(z)
    traj.steps.append(Step(phase, alpha, mu))
    if on_step is not None:
        on_step(len(traj.steps), traj.steps[-1], z)


# ------------------------------------------------------------ centering

def centrality_residual(z: PDPoint, mu) -> object:
    """max |products / mu - 1|."""
    with gmpy2.context(precision=z.precision_bits):
        mu = gmpy2.mpfr(mu)
        return max(abs(p / mu - 1) for p in z.products())


def _merit(z_blocks, mu, lp: RealLP, prec):
    x, w, s, y = z_blocks
    with gmpy2.context(precision=prec):
        acc = gmpy2.mpfr(0)
        for a, b in list(zip(x, s)) + list(zip(w, y)):
            acc += (a * b / mu - 1) ** 2
        return acc


def center(lp: RealLP, z: PDPoint, mu, *, tol=None, max_steps: int = 200,
           stats: dict | None = None) -> PDPoint:
    """Damped Newton on xs = wy = mu e with feasibility kept; returns the converged point."""
    prec = z.precision_bits
    with gmpy2.context(precision=prec):
        mu = gmpy2.mpfr(mu)
        tol = gmpy2.mpfr(2) ** (-prec // 4) if tol is None else gmpy2.mpfr(tol)
    for _ in range(max_steps):
        if centrality_residual(z, mu) <= tol:
            return z
        if stats is not None:
            stats["newton"] = stats.get("newton", 0) + 1
        d = newton_direction(z, mu, lp)
        with gmpy2.context(precision=prec):
            alpha = gmpy2.mpfr(1)
            for zb, db in ((z.x, d.dx), (z.w, d.dw), (z.s, d.ds), (z.y, d.dy)):
                for v, dv in zip(zb, db):
                    if dv < 0:
                        alpha = min(alpha, -gmpy2.mpfr("0.99") * v / dv)
            phi0 = _merit((z.x, z.w, z.s, z.y), mu, lp, prec)
            while True:
                cand = _combine(z, d, alpha)
                if all(v > 0 for blk in cand for v in blk):
                    phi = _merit(cand, mu, lp, prec)
                    if phi <= (1 - alpha * gmpy2.mpfr("1e-4")) * phi0:
                        break
                alpha /= 2
                if alpha < gmpy2.mpfr("1e-30"):
                    raise ConvergenceError("line search stalled while centering")
        z = PDPoint(*cand, precision_bits=prec)
    if centrality_residual(z, mu) <= tol:
        return z
    raise ConvergenceError(f"centering did not converge in {max_steps} damped steps")


@dataclass
class CPSample:
    lam: Fraction
    mu: object
    z: PDPoint
    residual: float
    primal_feasibility: float
    dual_feasibility: float
    newton_steps: int = 0


def _mu_of(lp: RealLP, lam):
    with lp.context():
        return power_of_lam(lp.t, lam)


def power_of_lam(t, lam):
    from .puiseux import power_of_t

    return power_of_t(gmpy2.mpfr(t), Fraction(lam))


def trace_central_path(lp: RealLP, lam_grid: Iterable, *, tol=None, z0: PDPoint | None = None,
                       max_ratio: float = 10.0, max_steps: int = 200) -> list[CPSample]:
    """Central-path points z(t^lam) for each lam of the grid, by warm-started continuation.

    Between consecutive grid values the target mu moves geometrically in
    factors of at most ``max_ratio``; each stage is damped-Newton centered.
    """
    prec = lp.precision_bits
    grid = [Fraction(l) for l in lam_grid]
    if not grid:
        return []
    with lp.context():
        tol = gmpy2.mpfr(2) ** (-prec // 4) if tol is None else gmpy2.mpfr(tol)
        log_ratio = math.log(max_ratio)
        log_t = float(gmpy2.log(lp.t))
    if z0 is None:
        start = max(Fraction(0), grid[0])
        x, w, s, y = tropical_warm_start(lp.r, lp.t, start, prec)
        z = PDPoint(x, w, s, y, prec)
        cur = start
    else:
        z = z0
        cur = None
    out = []
    for lam in grid:
        if cur is None:
            cur = lam
        stages = max(1, math.ceil(abs(float(lam - cur)) * log_t / log_ratio))
        stats: dict = {}
        for k in range(1, stages + 1):
            mid = cur + (lam - cur) * Fraction(k, stages)
            mu = _mu_of(lp, mid)
            stage_tol = tol if k == stages else gmpy2.mpfr("0.1")
            z = center(lp, z, mu, tol=stage_tol, max_steps=max_steps, stats=stats)
        cur = lam
        mu = _mu_of(lp, lam)
        pf, df = relative_feasibility(lp, z)
        out.append(CPSample(lam, mu, z, float(centrality_residual(z, mu)), pf, df, stats.get("newton", 0)))
    return out


def polygonal_angles(points: Sequence[Sequence], precision_bits: int = 256) -> list[float]:
    """Turning angles at the interior vertices of a polyline."""
    pts = [list(p) for p in points]
    if len(pts) < 3:
        raise ValueError("need at least three points")
    with gmpy2.context(precision=precision_bits):
        pts = [[gmpy2.mpfr(v) for v in p] for p in pts]
        diffs = []
        for a, b in zip(pts, pts[1:]):
            d = [bi - ai for ai, bi in zip(a, b)]
            if all(v == 0 for v in d):
                raise ValueError("consecutive points coincide")
            diffs.append(d)
        out = []
        for u, v in zip(diffs, diffs[1:]):
            dot = sum((a * b for a, b in zip(u, v)), gmpy2.mpfr(0))
            nu = gmpy2.sqrt(sum((a * a for a in u), gmpy2.mpfr(0)))
            nv = gmpy2.sqrt(sum((a * a for a in v), gmpy2.mpfr(0)))
            c = float(dot / (nu * nv))
            out.append(math.acos(max(-1.0, min(1.0, c))))
    return out


def polygonal_curvature(points: Sequence[Sequence], precision_bits: int = 256) -> float:
    """Sum of turning angles of the polyline through ``points``."""
    return math.fsum(polygonal_angles(points, precision_bits))


def start_point(lp: RealLP, lam_start, theta_inner: float = 0.25, tol=None) -> PDPoint:
    """Warm start at lam_start, centered so that it lies in the inner neighborhood."""
    x, w, s, y = tropical_warm_start(lp.r, lp.t, lam_start, lp.precision_bits)
    z = PDPoint(x, w, s, y, lp.precision_bits)
    mu = _mu_of(lp, lam_start)
    z = center(lp, z, mu, tol=tol if tol is not None else theta_inner / 4)
    if not in_wide_neighborhood(z, theta_inner):
        raise ConvergenceError("centered start is outside the inner neighborhood")
    return z
