"""Acceptance suite shared by ``lw verify`` and the test-suite."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import gmpy2
import numpy as np

from .instances import build_lw, evaluate_lp
from .ipm import (
    IPMConfig,
    PDPoint,
    _positive_and_in,
    duality_measure,
    in_wide_neighborhood,
    newton_direction,
    run_ipm,
    start_point,
    trace_central_path,
)
from .puiseux import MonomialMatrix, PuiseuxSeries, det_log_bounds, val
from .thresholds import central_path_budget, default_precision, min_valid_t
from .tropical import BOTTOM, TropPoint, directed_hausdorff, trop_mul, trop_segment
from .trop_path import (
    barycenter_check,
    breakpoints,
    epsilon0,
    gamma_count,
    last_pair,
    trop_curvature_lower_bound,
    trop_path_point,
    trop_path_w,
    trop_path_x,
    verify_membership,
)
from .experiments import (
    experiment_convergence,
    experiment_curvature,
    max_deviation_by_t,
    run_cell,
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    skipped: bool = False

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


# ---------------------------------------------------------------- 1

def table1_expected(j: int, lam: Fraction, k: int) -> dict | None:
    """Closed-form Table 1 entries for block j at column lam (None if lam is not a column)."""
    d = 2 ** j
    cols = {Fraction(4 * k + 2 * c, d): c for c in range(5)}
    if lam not in cols:
        return None
    c = cols[lam]
    num = {
        "x_odd": [2 * k, 2 * k + 2, 2 * k + 2, 2 * k + 4, 2 * k + 4],
        "x_even": [2 * k + 1, 2 * k + 1, 2 * k + 3, 2 * k + 3, 2 * k + 5],
        "w0": [2 * k, 2 * k + 2, 2 * k + 4, 2 * k + 4, 2 * k + 4],
        "w1": [2 * k + 2, 2 * k + 2, 2 * k + 2, 2 * k + 4, 2 * k + 6],
        "w2": [2 * k + 1, 2 * k + 1, 2 * k + 3, 2 * k + 3, 2 * k + 5],
    }
    return {key: j + Fraction(v[c], d) for key, v in num.items()}


def table1_cells(r: int):
    """(j, k, lam) for every Table 1 column inside [0, 2]."""
    for j in range(1, r):
        for k in range(0, max(1, 2 ** (j - 1) - 1), 2):
            for c in range(5):
                lam = Fraction(4 * k + 2 * c, 2 ** j)
                if lam <= 2:
                    yield j, k, lam


def check_table1(rs=range(2, 7), x_fn=trop_path_x, w_fn=trop_path_w) -> tuple[bool, str]:
    count = 0
    for r in rs:
        for j, k, lam in table1_cells(r):
            x, w = x_fn(r, lam), w_fn(r, lam)
            exp = table1_expected(j, lam, k)
            got = {"x_odd": x[2 * j], "x_even": x[2 * j + 1],
                   "w0": w[3 * j - 1], "w1": w[3 * j], "w2": w[3 * j + 1]}
            for key in exp:
                count += 1
                if got[key] != exp[key]:
                    return False, f"r={r} j={j} lambda={lam} {key}: {got[key]} != {exp[key]}"
    return True, f"{count} entries exact"


def c1(level):
    return check_table1()


# ---------------------------------------------------------------- 2

def c2(level):
    for r in range(2, 9):
        dec = breakpoints(r, 0, 2)
        pieces = dec.project(last_pair(r))
        if len(pieces) != 2 ** (r - 1):
            return False, f"r={r}: {len(pieces)} pieces"
        alternating = all(p.K in (frozenset({0}), frozenset({1})) for p in pieces) and all(
            a.K != b.K for a, b in zip(pieces, pieces[1:]))
        if not alternating:
            return False, f"r={r}: pieces do not alternate"
        g = gamma_count(dec, last_pair(r))
        if g < 2 ** (r - 1):
            return False, f"r={r}: gamma={g}"
    return True, "r=2..8: 2^(r-1) alternating pieces, gamma >= 2^(r-1)"


# ---------------------------------------------------------------- 3

def c3(level):
    got = []
    for r in range(3, 9):
        a = trop_curvature_lower_bound(r)
        if a.right_angles != 2 ** (r - 2) - 1:
            return False, f"r={r}: {a} != {2 ** (r - 2) - 1}*pi/2"
        got.append(a.right_angles)
    return True, f"right angles {got}"


# ---------------------------------------------------------------- 4

def c4(level, seed: int = 2024, count: int = 10_000):
    rng = random.Random(seed)
    total = 0
    for r in (2, 3):
        for _ in range(20):
            lam = Fraction(rng.randint(-16, 48), 8)
            bad, bary = barycenter_check(r, lam, count, rng)
            total += count
            if bad:
                return False, f"r={r} lambda={lam}: {bad} samples exceed the path point"
            if bary != trop_path_point(r, lam).full():
                return False, f"r={r} lambda={lam}: barycenter differs"
            if not verify_membership(r, lam).ok:
                return False, f"r={r} lambda={lam}: path point violates the system"
    return True, f"{total} samples below the path point"


# ---------------------------------------------------------------- 5

CONVERGENCE_TS = ("1e4", "1e8", "1e16")
CONVERGENCE_LAMS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))


def c5(level):
    ts = CONVERGENCE_TS if level == "full" else CONVERGENCE_TS[:2]
    rep = experiment_convergence(2, ts, CONVERGENCE_LAMS, Fraction(1, 2), precision_bits=1024)
    devs = max_deviation_by_t(rep)
    seq = [devs[t] for t in ts]
    if not rep.passed:
        return False, f"bound violated: {seq}"
    if any(b >= a for a, b in zip(seq, seq[1:])):
        return False, f"max deviation not strictly decreasing: {seq}"
    last = ts[-1]
    budget = central_path_budget(2, float(last), Fraction(1, 2))
    if level == "full" and not devs[last] <= 0.9 * budget:
        return False, f"less than 10% slack at t={last}"
    return True, "max deviation " + ", ".join(f"{t}:{d:.4f}" for t, d in zip(ts, seq)) + \
        f"; budget at {last} = {budget:.3f}"


# ---------------------------------------------------------------- 6

def c6(level):
    _, tr = run_cell(2, 10 ** 8)
    parts = [f"p(r=2,1e8)={tr.p}"]
    if tr.p < 2:
        return False, parts[0]
    if level != "full":
        return True, parts[0] + "; t=1e12 cells skipped at fast level"
    ps = {}
    for r in (2, 3, 4):
        _, tr = run_cell(r, 10 ** 12)
        ps[r] = tr.p
    parts.append("p(t=1e12)=" + str(ps))
    if ps[3] < 4:
        return False, "; ".join(parts)
    if not ps[2] <= ps[3] <= ps[4]:
        return False, "; ".join(parts) + " not nondecreasing"
    return True, "; ".join(parts) + " (threshold t not reached; trend only)"


# ---------------------------------------------------------------- 7

def c7(level):
    if level != "full":
        raise _Skip("full level only")
    rec3 = experiment_curvature(3, "1e8").records[0]
    rec4 = experiment_curvature(4, "1e12").records[0]
    corner = rec3["corner_angles"][0]
    ok = (rec3["measured"] >= 0.9 * math.pi / 2 and abs(corner - math.pi / 2) <= 0.15
          and rec4["measured"] >= 0.9 * 3 * math.pi / 2)
    return ok, (f"r=3: {rec3['measured']:.4f} (corner {corner:.4f}); "
                f"r=4: {rec4['measured']:.4f} vs {0.9 * 3 * math.pi / 2:.4f}")


# ---------------------------------------------------------------- 8

def c8(level, seed: int = 7):
    rng = random.Random(seed)
    r, t = 2, 10 ** 6
    prec = default_precision(r, t)
    lp = evaluate_lp(build_lw(r), t, prec)
    z0 = start_point(lp, Fraction(9, 4))
    traj = run_ipm(lp, IPMConfig(precision_bits=prec), z0)
    pts = traj.points
    with gmpy2.context(precision=prec):
        # affinity of the duality measure along feasible segments
        worst_aff = gmpy2.mpfr(0)
        for _ in range(20):
            a, b = rng.sample(pts, 2)
            al = gmpy2.mpfr(rng.random())
            comb = PDPoint(*[[(1 - al) * u + al * v for u, v in zip(ua, vb)]
                             for ua, vb in ((a.x, b.x), (a.w, b.w), (a.s, b.s), (a.y, b.y))],
                           precision_bits=prec)
            lhs = duality_measure(comb)
            rhs = (1 - al) * duality_measure(a) + al * duality_measure(b)
            worst_aff = max(worst_aff, abs(lhs - rhs) / rhs)
        aff_ok = worst_aff <= gmpy2.mpfr(2) ** (32 - prec)
    # interior beta membership and orthogonality on every accepted step
    beta_ok, worst_orth = True, 0.0
    for z, step, nxt in zip(pts, traj.steps, pts[1:]):
        goal = 0 if step.phase == "predictor" else duality_measure(z)
        d = newton_direction(z, goal, lp)
        with gmpy2.context(precision=prec):
            orth = abs(d.orthogonality()) / (duality_measure(z) * z.N)
        worst_orth = max(worst_orth, float(orth))
        for q in range(1, 17):
            if not _positive_and_in(z, d, step.alpha * q / 16, 0.5):
                beta_ok = False
    orth_ok = worst_orth <= 2.0 ** (16 - prec) * 1e6
    samples = trace_central_path(lp, [Fraction(2), Fraction(1), Fraction(0)])
    tol = 2.0 ** (-prec // 4)
    trace_ok = all(s.residual <= tol and s.primal_feasibility <= tol and s.dual_feasibility <= tol
                   for s in samples)
    all_in = all(in_wide_neighborhood(z, 0.5) for z in pts)
    ok = aff_ok and beta_ok and orth_ok and trace_ok and all_in
    return ok, (f"affinity err {float(worst_aff):.2e}, beta ok={beta_ok}, "
                f"orthogonality {worst_orth:.2e}, trace ok={trace_ok}, {len(traj.steps)} steps")


# ---------------------------------------------------------------- 9

def random_series(rng: random.Random, terms: int = 4) -> PuiseuxSeries:
    return PuiseuxSeries((Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3)),
                          Fraction(rng.randint(-8, 8), rng.choice([1, 2, 4])))
                         for _ in range(rng.randint(0, terms)))


def exact_det(rows) -> Fraction:
    """Fraction Gaussian elimination, independent of permutation expansion."""
    a = [[Fraction(v) for v in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for i in range(col + 1, n):
            f = a[i][col] / a[col][col]
            if f:
                for j in range(col, n):
                    a[i][j] -= f * a[col][j]
    return det


def random_monomial_matrix(rng: random.Random, d: int, denom: int = 4) -> MonomialMatrix:
    rows = []
    for _ in range(d):
        row = []
        for _ in range(d):
            if rng.random() < 0.2:
                row.append(0)
            else:
                row.append(PuiseuxSeries.monomial(rng.choice([-1, 1]),
                                                  Fraction(rng.randint(-2 * denom, 2 * denom), denom)))
        rows.append(row)
    return MonomialMatrix(rows)


def check_det_bracket(M: MonomialMatrix, denom: int = 4) -> bool:
    """Evaluate at t = T^denom (T integer) so every entry is an exact rational."""
    br0 = det_log_bounds(M, 2.0)
    T = 2
    while T ** denom < br0.threshold:
        T += 1
    t = T ** denom
    br = det_log_bounds(M, t)
    num = []
    for row in M.entries:
        r = []
        for v in row:
            if v.is_zero():
                r.append(Fraction(0))
            else:
                c, e = v.terms[0]
                k = e * denom
                r.append(c * (Fraction(T) ** int(k)))
        num.append(r)
    det = exact_det(num)
    if br.val_det is BOTTOM:
        return det == 0
    if det == 0:
        return False
    logt = (math.log(abs(det.numerator)) - math.log(det.denominator)) / math.log(t)
    slack = 1e-9
    return br.guaranteed and br.lower - slack <= logt <= br.upper + slack


def c9(level, seed: int = 99):
    rng = random.Random(seed)
    # valuation homomorphism
    for _ in range(1000):
        f, g = random_series(rng), random_series(rng)
        if val(f * g) != trop_mul(val(f), val(g)):
            return False, f"val(fg) failed for {f}, {g}"
        vs = val(f + g)
        top = max(val(f), val(g))
        if not vs <= top:
            return False, f"val(f+g) > max for {f}, {g}"
        if f.sign() > 0 and g.sign() > 0 and vs != top:
            return False, f"val(f+g) != max for positive {f}, {g}"
    # determinant bracket
    for _ in range(100):
        M = random_monomial_matrix(rng, rng.randint(1, 5))
        if not check_det_bracket(M):
            return False, f"det bracket failed for {M.entries}"
    # nested chain on comparable pairs
    for _ in range(1000):
        d = rng.randint(1, 8)
        u = [Fraction(rng.randint(-20, 20), rng.choice([1, 2, 4])) for _ in range(d)]
        v = [a + Fraction(rng.randint(0, 20), rng.choice([1, 2, 4])) for a in u]
        seg = trop_segment(TropPoint(u), TropPoint(v))
        sets = seg.direction_sets()
        if len(sets) > d or any(s is None for s in sets):
            return False, f"bad segment for {u}, {v}"
        if any(not a < b for a, b in zip(sets, sets[1:])):
            return False, f"direction sets not nested for {u}, {v}"
        if seg.start != TropPoint(u) or seg.end != TropPoint(v):
            return False, "endpoints differ"
    # log-limit of classical segments
    worst = {}
    for t in (1e2, 1e6):
        bound = math.log(2) / math.log(t)
        for _ in range(100):
            dev = classical_segment_deviation(rng, t)
            worst[t] = max(worst.get(t, 0.0), dev)
            if dev > bound + 1e-9:
                return False, f"segment deviation {dev} > log_t 2 at t={t}"
    return True, "val, det bracket, nested chains and log-limit segments ok; worst segment " + \
        ", ".join(f"t={t:g}:{w:.4f}" for t, w in worst.items())


def classical_segment_deviation(rng: random.Random, t: float, samples: int = 2000) -> float:
    """d_inf between log_t of a random classical segment and the tropical segment.

    The segment is parametrised by ``s = 1 / (1 + t^(-tau))`` so that the
    sample is uniform in the tropical parameter ``tau = log_t s - log_t(1-s)``.
    """
    d = rng.randint(1, 6)
    u = [rng.uniform(-3, 3) for _ in range(d)]
    v = [rng.uniform(-3, 3) for _ in range(d)]
    span = 2 * max(abs(a - b) for a, b in zip(u, v)) + 2
    lt = math.log(t)
    cls = []
    for k in range(samples + 1):
        tau = -span + 2 * span * k / samples
        # log_t((1-s) t^u + s t^v) with s = 1/(1+t^-tau), evaluated stably
        lam_ = -math.log1p(t ** tau) / lt if tau < 0 else -tau - math.log1p(t ** -tau) / lt
        mu_ = lam_ + tau
        cls.append(TropPoint([_log_t_sum(lam_ + a, mu_ + b, lt) for a, b in zip(u, v)]))
    trop = trop_segment(TropPoint(u), TropPoint(v))
    forward = directed_hausdorff(cls[::4], trop, "d_inf")
    # reverse direction: the dense sample gives an upper bound on each distance
    arr = np.array([[float(c) for c in q] for q in cls])
    backward = max(float(np.abs(arr - np.array([float(c) for c in p])).max(axis=1).min())
                   for p in trop.breakpoints)
    return max(forward, backward)


def _log_t_sum(a: float, b: float, lt: float) -> float:
    """log_t(t^a + t^b)."""
    hi, lo = max(a, b), min(a, b)
    return hi + math.log1p(math.exp((lo - hi) * lt)) / lt


# ---------------------------------------------------------------- 10

def c10(level):
    expected = (8 * math.factorial(19) ** 24) ** 2
    if min_valid_t(2, Fraction(1, 2)) != expected:
        return False, "min_valid_t(2, 1/2) mismatch"
    for r in range(2, 9):
        if epsilon0(r) != Fraction(1, 3 * 2 ** (r - 1)):
            return False, f"epsilon0({r}) mismatch"
    return True, f"min_valid_t(2,1/2) has {len(str(expected))} digits; epsilon0 ok for r=2..8"


class _Skip(Exception):
    pass


CRITERIA: dict[int, tuple[str, Callable]] = {
    1: ("Table 1 reproduction", c1),
    2: ("staircase and gamma", c2),
    3: ("tropical curvature count", c3),
    4: ("barycenter property", c4),
    5: ("convergence bound", c5),
    6: ("iteration lower bound (trend)", c6),
    7: ("classical curvature", c7),
    8: ("IPM structural invariants", c8),
    9: ("Puiseux and metric lemmas", c9),
    10: ("threshold formulas", c10),
}


def run_criterion(number: int, level: str = "full") -> CriterionResult:
    name, fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        ok, detail = fn(level)
        skipped = False
    except _Skip as exc:
        ok, detail, skipped = True, str(exc), True
    return CriterionResult(number, name, bool(ok), detail, time.perf_counter() - t0, skipped)


def verify_suite(level: str = "fast", only=None, echo=print) -> tuple[int, list[CriterionResult]]:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    results = []
    for number in sorted(CRITERIA):
        if only and number not in only:
            continue
        res = run_criterion(number, level)
        results.append(res)
        if echo:
            echo(res.line())
    code = 0 if all(r.passed for r in results) else 1
    return code, results


def junit_xml(results: list[CriterionResult]) -> str:
    from xml.sax.saxutils import escape

    fails = sum(1 for r in results if not r.passed)
    skips = sum(1 for r in results if r.skipped)
    out = [f'<testsuite name="lw-verify" tests="{len(results)}" failures="{fails}" skipped="{skips}">']
    for r in results:
        out.append(f'  <testcase name="criterion_{r.number}" time="{r.seconds:.3f}">')
        if r.skipped:
            out.append(f'    <skipped message="{escape(r.detail)}"/>')
        elif not r.passed:
            out.append(f'    <failure message="{escape(r.detail)}"/>')
        out.append("  </testcase>")
    out.append("</testsuite>")
    return "\n".join(out)
