"""Experiment drivers and report serialization."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .instances import build_lw, evaluate_lp
from .ipm import (
    IPMConfig,
    polygonal_angles,
    run_ipm,
    start_point,
    trace_central_path,
)
from .thresholds import (
    central_path_budget,
    default_precision,
    delta_bound,
    delta_bound_guaranteed,
    min_valid_t,
)
from .trop_path import curvature_grid, trop_curvature_lower_bound, trop_path_point

LAMBDA_START = Fraction(9, 4)


def parse_t(value) -> int | Fraction:
    """Decimal strings such as ``1e8`` or ``100`` parsed exactly."""
    if isinstance(value, (int, Fraction)):
        t = Fraction(value)
    else:
        text = str(value).strip().lower()
        if "^" in text:
            base, exp = text.split("^", 1)
            t = Fraction(base) ** int(exp)
        else:
            t = Fraction(text)
    if t <= 1:
        raise ValueError(f"t must exceed 1, got {value!r}")
    return int(t) if t.denominator == 1 else t


def t_label(t) -> str:
    t = Fraction(t)
    if t.denominator == 1:
        k = 0
        v = t.numerator
        while v % 10 == 0 and v > 1:
            v //= 10
            k += 1
        if v == 1 and k >= 3:
            return f"1e{k}"
    return str(t)


def _t_mp(t):
    t = Fraction(t)
    return t.numerator if t.denominator == 1 else t


@dataclass
class Report:
    kind: str
    records: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    version: str = __version__
    invocation: str = ""

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.config, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def passed(self) -> bool:
        return all(r.get("pass", True) for r in self.records)

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind, "version": self.version, "invocation": self.invocation,
            "config": self.config, "config_hash": self.config_hash, "records": self.records,
        }, indent=2, default=str)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        rep = cls(d["kind"], d["records"], d["config"], d["version"], d["invocation"])
        if d.get("config_hash") != rep.config_hash:
            raise ValueError("config hash mismatch")
        return rep

    def to_csv(self) -> str:
        return records_to_csv(self.records)

    def write(self, path: str | Path, fmt: str | None = None) -> None:
        path = Path(path)
        fmt = fmt or ("csv" if path.suffix == ".csv" else "json")
        path.write_text(self.to_csv() if fmt == "csv" else self.to_json())


_TYPES = {bool: "bool", int: "int", float: "float", str: "str", type(None): "null"}


def records_to_csv(records: Sequence[dict]) -> str:
    """CSV with ``name:type`` headers so that values parse back to the same objects."""
    if not records:
        return ""
    keys = list(records[0])
    types = {}
    for k in keys:
        kinds = {_TYPES.get(type(r.get(k)), "json") for r in records} - {"null"}
        types[k] = kinds.pop() if len(kinds) == 1 else "json"
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow([f"{k}:{types[k]}" for k in keys])
    for r in records:
        row = []
        for k in keys:
            v = r.get(k)
            if v is None:
                row.append("")
            elif types[k] == "json":
                row.append(json.dumps(v))
            elif types[k] == "float":
                row.append(repr(v))
            else:
                row.append(str(v))
        wr.writerow(row)
    return buf.getvalue()


def records_from_csv(text: str) -> list[dict]:
    rd = csv.reader(io.StringIO(text))
    rows = list(rd)
    if not rows:
        return []
    header = [h.rsplit(":", 1) for h in rows[0]]
    out = []
    for row in rows[1:]:
        rec = {}
        for (name, typ), cell in zip(header, row):
            if cell == "" and typ != "str":
                rec[name] = None
            elif typ == "bool":
                rec[name] = cell == "True"
            elif typ == "int":
                rec[name] = int(cell)
            elif typ == "float":
                rec[name] = float(cell)
            elif typ == "str":
                rec[name] = cell
            else:
                rec[name] = json.loads(cell)
        out.append(rec)
    return out


def invocation() -> str:
    return " ".join(["lw"] + sys.argv[1:]) if sys.argv else "lw"


# ------------------------------------------------------------ iterations

def run_cell(r: int, t, *, variant: str = "predictor-corrector", theta=0.5,
             precision_bits: int | None = None, max_iters: int = 1000, on_step=None):
    """Build LW(r, t), start near mu = t^{9/4} and run to mu <= 1."""
    prec = precision_bits or default_precision(r, float(t))
    lp = evaluate_lp(build_lw(r), _t_mp(t), prec)
    theta_inner = min(0.25, float(theta) / 2)
    z0 = start_point(lp, LAMBDA_START, theta_inner)
    cfg = IPMConfig(variant=variant, theta=float(theta), theta_inner=theta_inner,
                    mu_target=1.0, max_iters=max_iters, precision_bits=prec)
    return lp, run_ipm(lp, cfg, z0, on_step=on_step)


def experiment_iterations(rs: Iterable[int], ts: Iterable, *, variant: str = "predictor-corrector",
                          theta=Fraction(1, 2), precision_bits: int | None = None) -> Report:
    rs, ts = list(rs), [parse_t(t) for t in ts]
    rep = Report("iterations", config={
        "r": rs, "t": [t_label(t) for t in ts], "variant": variant, "theta": str(theta),
        "precision_bits": precision_bits, "lambda_start": str(LAMBDA_START)},
        invocation=invocation())
    for r in rs:
        thr = min_valid_t(r, theta) if r >= 2 else None
        for t in ts:
            lp, traj = run_cell(r, t, variant=variant, theta=theta, precision_bits=precision_bits)
            mus = traj.mu_bars()
            rep.records.append({
                "r": r, "t": t_label(t), "segments": traj.p, "iterations": traj.iterations,
                "lower_bound": 2 ** (r - 1), "pass": traj.p >= 2 ** (r - 1),
                "mu_start": format(mus[0], ".7g"), "mu_end": format(mus[-1], ".7g"),
                "threshold_met": thr is not None and Fraction(t) >= thr,
                "threshold_digits": len(str(thr)) if thr is not None else None,
                "precision_bits": lp.precision_bits,
            })
    return rep


# ------------------------------------------------------------ convergence

def log_deviation(sample, r: int, t) -> float:
    z = sample.z.log_t(_t_mp(t))
    ref = [float(v) for v in trop_path_point(r, sample.lam).full()]
    return max(abs(a - b) for a, b in zip(z, ref))


def experiment_convergence(r: int, ts: Iterable, lams: Iterable, theta=Fraction(1, 2), *,
                           precision_bits: int | None = None) -> Report:
    ts = [parse_t(t) for t in ts]
    lams = sorted({Fraction(l) for l in lams}, reverse=True)
    rep = Report("convergence", config={
        "r": r, "t": [t_label(t) for t in ts], "lambda": [str(l) for l in lams],
        "theta": str(theta), "precision_bits": precision_bits}, invocation=invocation())
    for t in ts:
        prec = precision_bits or max(1024, default_precision(r, float(t)))
        lp = evaluate_lp(build_lw(r), _t_mp(t), prec)
        samples = trace_central_path(lp, lams)
        budget = central_path_budget(r, float(t), theta)
        for s in samples:
            dev = log_deviation(s, r, t)
            rep.records.append({
                "r": r, "t": t_label(t), "lambda": str(s.lam), "deviation": dev,
                "budget": budget, "delta_bound": delta_bound(r, float(t)),
                "guaranteed": delta_bound_guaranteed(r, float(t)),
                "residual": s.residual, "pass": dev <= budget,
            })
    return rep


def max_deviation_by_t(rep: Report) -> dict:
    out: dict = {}
    for rec in rep.records:
        out[rec["t"]] = max(out.get(rec["t"], 0.0), rec["deviation"])
    return out


# ------------------------------------------------------------ curvature

def refined_grid(r: int, refine: int = 8) -> list[Fraction]:
    g = curvature_grid(r)
    lo, hi = g[0], g[-1]
    steps = refine * (len(g) - 1)
    return [lo + (hi - lo) * Fraction(k, steps) for k in range(steps + 1)]


def experiment_curvature(r: int, t, *, refine: int = 8,
                         precision_bits: int | None = None) -> Report:
    t = parse_t(t)
    prec = precision_bits or default_precision(r, float(t))
    lp = evaluate_lp(build_lw(r), _t_mp(t), prec)
    fine = sorted(refined_grid(r, refine), reverse=True)
    samples = trace_central_path(lp, fine)
    samples.sort(key=lambda s: s.lam)
    pts = [s.z.flat() for s in samples]
    coarse_lams = curvature_grid(r)
    coarse = [s.z.flat() for s in samples if s.lam in coarse_lams]
    measured = math.fsum(polygonal_angles(pts, prec)) if len(pts) >= 3 else 0.0
    corners = polygonal_angles(coarse, prec) if len(coarse) >= 3 else []
    bound = trop_curvature_lower_bound(r) if r >= 3 else None
    k = bound.right_angles if bound is not None else 0
    rep = Report("curvature", config={"r": r, "t": t_label(t), "refine": refine,
                                      "precision_bits": prec}, invocation=invocation())
    rep.records.append({
        "r": r, "t": t_label(t), "measured": measured, "tropical_right_angles": k,
        "tropical_bound": k * math.pi / 2,
        "corner_lambdas": [str(l) for l in coarse_lams[1:-1]],
        "corner_angles": corners,
        "pass": measured >= 0.9 * k * math.pi / 2,
    })
    return rep
