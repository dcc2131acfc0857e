"""Command line interface: ``lw <subcommand> ...``.

Exit codes: 0 ok, 1 assertion failure, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import gmpy2

from . import __version__
from .experiments import (
    LAMBDA_START,
    Report,
    experiment_convergence,
    experiment_curvature,
    experiment_iterations,
    invocation,
    parse_t,
    t_label,
)
from .instances import build_lw, evaluate_lp
from .ipm import (
    ConvergenceError,
    IPMConfig,
    NeighborhoodError,
    StepError,
    duality_measure,
    run_ipm,
    start_point,
    trace_central_path,
)
from .linalg import SingularSystemError
from .puiseux import PrecisionError
from .thresholds import (
    central_path_budget,
    default_precision,
    delta_bound,
    delta_bound_guaranteed,
    min_valid_t,
)
from .trop_path import (
    breakpoints,
    epsilon0,
    gamma_count,
    last_pair,
    trop_curvature_angles,
    trop_curvature_lower_bound,
    curvature_grid,
    trop_path_point,
)

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}") from exc


def _t(text: str):
    try:
        return parse_t(text)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(str(exc)) from exc


def _lam_of_mu(text: str, t) -> Fraction:
    """``t^q`` gives q exactly; a plain number mu gives log_t mu (rounded)."""
    text = text.strip().replace(" ", "")
    if text.startswith("t^"):
        return _frac(text[2:].strip("()"))
    if text == "t":
        return Fraction(1)
    try:
        mu = float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse mu value {text!r}") from exc
    if mu <= 0:
        raise ConfigError("mu must be positive")
    return Fraction(math.log(mu) / math.log(float(t))).limit_denominator(1 << 20)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue()


def _emit_report(args, rep: Report) -> int:
    _emit(args, rep.to_csv() if args.format == "csv" else rep.to_json())
    return EXIT_OK if rep.passed else EXIT_ASSERT


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    lp = build_lw(args.r)
    if args.t is None:
        data = lp.to_json()
        if args.format == "csv":
            rows = [[i + 1, "A", k + 1, json.dumps(v)] for i, row in enumerate(data["A"])
                    for k, v in enumerate(row)]
            rows += [[i + 1, "b", "", json.dumps(v)] for i, v in enumerate(data["b"])]
            rows += [["", "c", k + 1, json.dumps(v)] for k, v in enumerate(data["c"])]
            _emit(args, _rows_to_csv(["row", "block", "col", "entry"], rows))
        else:
            _emit(args, json.dumps(data, indent=2))
        return EXIT_OK
    t = _t(args.t)
    prec = args.precision_bits or default_precision(args.r, float(t))
    real = evaluate_lp(lp, t if isinstance(t, int) else gmpy2.mpq(t.numerator, t.denominator), prec)
    digits = max(20, int(prec * 0.30103) + 2)

    def dec(v):
        return format(v, f".{digits}g") if v != 0 else "0"

    data = lp.to_json()
    data["t"] = t_label(t)
    data["precision_bits"] = prec
    data["A_numeric"] = [[dec(v) for v in row] for row in real.A]
    data["b_numeric"] = [dec(v) for v in real.b]
    data["c_numeric"] = [dec(v) for v in real.c]
    if args.format == "csv":
        rows = [[i + 1, k + 1, data["A_numeric"][i][k]] for i in range(lp.m) for k in range(lp.n)]
        _emit(args, _rows_to_csv(["row", "col", "value"], rows))
    else:
        _emit(args, json.dumps(data, indent=2))
    return EXIT_OK


def _lambda_grid(lo: Fraction, hi: Fraction, step: Fraction) -> list[Fraction]:
    if step <= 0:
        raise ConfigError("step must be positive")
    if hi < lo:
        raise ConfigError("lambda-to must not be below lambda-from")
    out, cur = [], lo
    while cur <= hi:
        out.append(cur)
        cur += step
    return out


def cmd_trop_path(args) -> int:
    r = args.r
    step = _frac(args.step) if args.step else Fraction(1, 2 ** r)
    grid = _lambda_grid(_frac(args.lambda_from), _frac(args.lambda_to), step)
    n, m = 2 * r, 3 * r - 1
    header = (["lambda"] + [f"x_{i + 1}" for i in range(n)] + [f"w_{i + 1}" for i in range(m)]
              + [f"s_{i + 1}" for i in range(n)] + [f"y_{i + 1}" for i in range(m)])
    rows = [[str(l)] + [str(v) for v in trop_path_point(r, l).full()] for l in grid]
    if args.format == "json":
        _emit(args, json.dumps([dict(zip(header, row)) for row in rows], indent=2))
    else:
        _emit(args, _rows_to_csv(header, rows))
    return EXIT_OK


def cmd_gamma(args) -> int:
    r = args.r
    lo, hi = _frac(args.lambda_from), _frac(args.lambda_to)
    dec = breakpoints(r, lo, hi)
    proj = last_pair(r) if args.project == "last-pair" else None
    pieces = dec.project(proj) if proj else list(dec.pieces)
    g = gamma_count(dec, proj) if pieces else 0
    out = {
        "r": r, "lambda_from": str(lo), "lambda_to": str(hi),
        "projection": args.project or "full", "pieces": len(pieces), "gamma": g,
        "lower_bound": 2 ** (r - 1), "breakpoints": [str(p.lo) for p in pieces] + (
            [str(pieces[-1].hi)] if pieces else []),
        "direction_sets": [sorted(p.K) for p in pieces],
    }
    if proj:
        # staircase plot data (lambda, x_{2r-1}, x_{2r})
        out["staircase"] = [[str(l)] + [str(v) for v in trop_path_point(r, l).x[-2:]]
                            for l in out["breakpoints"]]
    _emit(args, json.dumps(out, indent=2))
    return EXIT_OK


def cmd_trop_curvature(args) -> int:
    r = args.r
    if r < 2:
        raise ConfigError("r must be at least 2")
    grid = curvature_grid(r)
    total = trop_curvature_lower_bound(r, grid) if len(grid) >= 3 else None
    angles = trop_curvature_angles(r, grid) if len(grid) >= 3 else []
    k = total.right_angles if total else 0
    out = {"r": r, "grid": [str(g) for g in grid], "right_angles": k,
           "value": k * math.pi / 2, "expected_right_angles": 2 ** (r - 2) - 1,
           "angles": [str(a) for a in angles]}
    _emit(args, json.dumps(out, indent=2))
    return EXIT_OK if k == 2 ** (r - 2) - 1 else EXIT_ASSERT


def cmd_run_ipm(args) -> int:
    r = args.r
    t = _t(args.t)
    prec = args.precision_bits or default_precision(r, float(t))
    variant = {"pc": "predictor-corrector", "long-step": "long-step",
               "predictor-corrector": "predictor-corrector"}[args.variant]
    lam0 = _lam_of_mu(args.mu_start, t)
    lam_end = _lam_of_mu(args.mu_end, t)
    lp = evaluate_lp(build_lw(r), t, prec)
    theta = float(_frac(args.theta))
    theta_inner = min(0.25, theta / 2)
    z0 = start_point(lp, lam0, theta_inner)
    with gmpy2.context(precision=prec):
        from .puiseux import power_of_t

        mu_end = power_of_t(gmpy2.mpfr(t), lam_end)
    cfg = IPMConfig(variant=variant, theta=theta, theta_inner=theta_inner, mu_target=mu_end,
                    max_iters=args.max_iters, precision_bits=prec, sigma=args.sigma)
    traj = run_ipm(lp, cfg, z0)
    if args.trace:
        header = ["iter", "phase", "alpha", "mu_bar"] + [
            f"log_{b}_{i + 1}" for b, size in (("x", lp.n), ("w", lp.m), ("s", lp.n), ("y", lp.m))
            for i in range(size)]
        rows = [[0, "start", "", _dec(duality_measure(z0))] + z0.log_t(t)]
        for k, (st, z) in enumerate(zip(traj.steps, traj.points[1:]), 1):
            rows.append([k, st.phase, repr(st.alpha), _dec(st.mu_bar)] + z.log_t(t))
        Path(args.trace).write_text(_rows_to_csv(header, rows))
    summary = {"r": r, "t": t_label(t), "variant": variant, "theta": theta,
               "segments": traj.p, "iterations": traj.iterations,
               "lower_bound": 2 ** (r - 1), "mu_start": _dec(duality_measure(traj.points[0])),
               "mu_end": _dec(duality_measure(traj.points[-1])), "precision_bits": prec,
               "invocation": invocation()}
    _emit(args, json.dumps(summary, indent=2))
    return EXIT_OK


def _dec(v) -> str:
    return format(gmpy2.mpfr(v), ".30g")


def cmd_trace_cp(args) -> int:
    r = args.r
    t = _t(args.t)
    prec = args.precision_bits or max(512, default_precision(r, float(t)))
    lo, hi = _frac(args.lambda_from), _frac(args.lambda_to)
    if args.samples < 1:
        raise ConfigError("samples must be positive")
    grid = [hi] if args.samples == 1 else [
        hi - (hi - lo) * Fraction(k, args.samples - 1) for k in range(args.samples)]
    lp = evaluate_lp(build_lw(r), t, prec)
    tol = float(args.tol) if args.tol else None
    samples = trace_central_path(lp, grid, tol=tol)
    header = ["lambda", "mu", "residual", "primal_feas", "dual_feas", "dinf_to_trop"] + [
        f"log_{b}_{i + 1}" for b, size in (("x", lp.n), ("w", lp.m), ("s", lp.n), ("y", lp.m))
        for i in range(size)]
    rows = []
    for s in samples:
        logs = s.z.log_t(t)
        ref = [float(v) for v in trop_path_point(r, s.lam).full()]
        dev = max(abs(a - b) for a, b in zip(logs, ref))
        rows.append([str(s.lam), _dec(s.mu), repr(s.residual), repr(s.primal_feasibility),
                     repr(s.dual_feasibility), repr(dev)] + logs)
    _emit(args, _rows_to_csv(header, rows))
    return EXIT_OK


def cmd_iterations(args) -> int:
    rs = [int(v) for v in args.r_list.split(",")]
    ts = [_t(v) for v in args.t_list.split(",")]
    rep = experiment_iterations(rs, ts, variant={"pc": "predictor-corrector"}.get(
        args.variant, args.variant), theta=_frac(args.theta), precision_bits=args.precision_bits)
    return _emit_report(args, rep)


def cmd_convergence(args) -> int:
    ts = [_t(v) for v in args.t_list.split(",")]
    lams = [_frac(v) for v in args.lambdas.split(",")]
    rep = experiment_convergence(args.r, ts, lams, _frac(args.theta),
                                 precision_bits=args.precision_bits)
    return _emit_report(args, rep)


def cmd_curvature(args) -> int:
    rep = experiment_curvature(args.r, _t(args.t), refine=args.refine,
                               precision_bits=args.precision_bits)
    return _emit_report(args, rep)


def cmd_thresholds(args) -> int:
    r, theta = args.r, _frac(args.theta)
    if not 0 < theta < 1:
        raise ConfigError("theta must lie in (0, 1)")
    out = {"r": r, "theta": str(theta), "epsilon0": str(epsilon0(r))}
    v = min_valid_t(r, theta)
    out["min_valid_t_digits"] = len(str(v))
    out["min_valid_t_bits"] = v.bit_length()
    if args.full_value:
        out["min_valid_t"] = str(v)
    if args.t:
        t = _t(args.t)
        out["t"] = t_label(t)
        out["delta_bound"] = delta_bound(r, float(t))
        out["delta_bound_guaranteed"] = delta_bound_guaranteed(r, float(t))
        out["central_path_budget"] = central_path_budget(r, float(t), theta)
        out["threshold_met"] = Fraction(t) >= v
        out["default_precision"] = default_precision(r, float(t))
    _emit(args, json.dumps(out, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import junit_xml, verify_suite

    only = {int(v) for v in args.only.split(",")} if args.only else None
    code, results = verify_suite(args.level, only=only,
                                 echo=lambda line: print(line, flush=True))
    if args.junit:
        Path(args.junit).write_text(junit_xml(results))
    passed = sum(1 for r in results if r.passed)
    print(f"{passed}/{len(results)} criteria passed")
    return code


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--precision-bits", type=int, default=None)

    p = argparse.ArgumentParser(prog="lw", description="Tropical central paths and LW(r, t) experiments.")
    p.add_argument("--version", action="version", version=f"lw {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="emit the LW(r) instance")
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--t", default=None)
    g.set_defaults(func=cmd_gen, default_format="json")

    g = sub.add_parser("trop-path", parents=[common], help="tabulate the tropical central path")
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--lambda-from", default="0")
    g.add_argument("--lambda-to", default="2")
    g.add_argument("--step", default=None)
    g.set_defaults(func=cmd_trop_path, default_format="csv")

    g = sub.add_parser("gamma", parents=[common], help="count tropical segments")
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--lambda-from", default="0")
    g.add_argument("--lambda-to", default="2")
    g.add_argument("--project", choices=("last-pair",), default=None)
    g.set_defaults(func=cmd_gamma, default_format="json")

    g = sub.add_parser("trop-curvature", parents=[common], help="tropical curvature lower bound")
    g.add_argument("--r", type=int, required=True)
    g.set_defaults(func=cmd_trop_curvature, default_format="json")

    g = sub.add_parser("run-ipm", parents=[common], help="run an interior point method on LW(r, t)")
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--t", required=True)
    g.add_argument("--theta", default="0.5")
    g.add_argument("--variant", choices=("pc", "predictor-corrector", "long-step"), default="pc")
    g.add_argument("--sigma", type=float, default=0.1)
    g.add_argument("--mu-start", default=f"t^({LAMBDA_START})")
    g.add_argument("--mu-end", default="1")
    g.add_argument("--max-iters", type=int, default=1000)
    g.add_argument("--trace", default=None, help="per-iteration CSV")
    g.set_defaults(func=cmd_run_ipm, default_format="json")

    g = sub.add_parser("trace-cp", parents=[common], help="sample the classical central path")
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--t", required=True)
    g.add_argument("--lambda-from", default="0")
    g.add_argument("--lambda-to", default="2")
    g.add_argument("--samples", type=int, default=9)
    g.add_argument("--tol", default=None)
    g.set_defaults(func=cmd_trace_cp, default_format="csv")

    g = sub.add_parser("iterations", parents=[common], help="iteration-count experiment")
    g.add_argument("--r-list", default="2,3,4")
    g.add_argument("--t-list", default="1e8")
    g.add_argument("--variant", choices=("pc", "predictor-corrector", "long-step"), default="pc")
    g.add_argument("--theta", default="1/2")
    g.set_defaults(func=cmd_iterations, default_format="json")

    g = sub.add_parser("convergence", parents=[common], help="log-limit convergence experiment")
    g.add_argument("--r", type=int, default=2)
    g.add_argument("--t-list", default="1e4,1e8,1e16")
    g.add_argument("--lambdas", default="0,1/2,1,3/2,2")
    g.add_argument("--theta", default="1/2")
    g.set_defaults(func=cmd_convergence, default_format="json")

    g = sub.add_parser("curvature", parents=[common], help="classical curvature experiment")
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--t", required=True)
    g.add_argument("--refine", type=int, default=8)
    g.set_defaults(func=cmd_curvature, default_format="json")

    g = sub.add_parser("thresholds", parents=[common], help="threshold formulas")
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--theta", default="1/2")
    g.add_argument("--t", default=None)
    g.add_argument("--full-value", action="store_true", help="print min_valid_t in full")
    g.set_defaults(func=cmd_thresholds, default_format="json")

    g = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    g.add_argument("--level", choices=("fast", "full"), default="fast")
    g.add_argument("--only", default=None, help="comma separated criterion numbers")
    g.add_argument("--junit", default=None, help="write a JUnit XML summary")
    g.set_defaults(func=cmd_verify, default_format="json")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    try:
        return args.func(args)
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"lw: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, NeighborhoodError, StepError, SingularSystemError,
            PrecisionError, ArithmeticError) as exc:
        print(f"lw: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AssertionError as exc:
        print(f"lw: assertion failure: {exc}", file=sys.stderr)
        return EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
