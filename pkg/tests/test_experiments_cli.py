"""Report serialization, t parsing and the lw command line."""

import csv
import json
from fractions import Fraction as F

import pytest

from lwtrop import verify
from lwtrop.cli import main
from lwtrop.experiments import Report, parse_t, records_from_csv, records_to_csv, t_label
from lwtrop.tropical import TropPoint
from lwtrop.trop_path import trop_path_x


def test_parse_t():
    assert parse_t("1e8") == 10 ** 8
    assert parse_t("2^10") == 1024
    assert parse_t("5/2") == F(5, 2)
    assert parse_t(100) == 100
    for bad in ("1", "0.5", "-3"):
        with pytest.raises(ValueError):
            parse_t(bad)


def test_t_label():
    assert t_label(10 ** 16) == "1e16"
    assert t_label(100) == "100"
    assert t_label(F(5, 2)) == "5/2"


def test_report_json_roundtrip():
    rep = Report("demo", [{"r": 2, "ok": True}], {"r": 2, "t": "1e8"}, invocation="lw demo")
    back = Report.from_json(rep.to_json())
    assert back == rep and back.config_hash == rep.config_hash


def test_report_hash_mismatch():
    d = json.loads(Report("demo", [], {"r": 2}).to_json())
    d["config"]["r"] = 3
    with pytest.raises(ValueError):
        Report.from_json(json.dumps(d))


def test_csv_roundtrip():
    recs = [{"r": 2, "t": "1e8", "dev": 0.125, "ok": True, "pts": [1, 2], "note": None},
            {"r": 3, "t": "1e4", "dev": 1e-30, "ok": False, "pts": [], "note": None}]
    assert records_from_csv(records_to_csv(recs)) == recs
    assert records_to_csv([]) == ""


# ---------------------------------------------------------------- CLI

def test_cli_bad_t_is_config_error(capsys):
    assert main(["run-ipm", "--r", "2", "--t", "1"]) == 2


def test_cli_trop_curvature():
    assert main(["trop-curvature", "--r", "4"]) == 0


def test_cli_verify_junit(tmp_path):
    out = tmp_path / "v.xml"
    assert main(["verify", "--only", "1,2,3", "--junit", str(out)]) == 0
    assert 'tests="3" failures="0"' in out.read_text()


@pytest.mark.parametrize("argv", [
    ["gen", "--r", "2", "--format", "json"],
    ["gen", "--r", "2", "--t", "16"],
    ["trop-path", "--r", "3", "--step", "1/4", "--format", "csv"],
    ["gamma", "--r", "3", "--project", "last-pair"],
    ["thresholds", "--r", "2", "--t", "1e8"],
])
def test_cli_subcommands(argv, tmp_path):
    out = tmp_path / "out.txt"
    assert main(argv + ["--out", str(out)]) == 0
    assert out.read_text().strip()


def test_cli_run_ipm_trace(tmp_path):
    trace = tmp_path / "trace.csv"
    out = tmp_path / "run.json"
    assert main(["run-ipm", "--r", "1", "--t", "1e4", "--trace", str(trace), "--out", str(out)]) == 0
    rows = list(csv.DictReader(trace.read_text().splitlines()))
    assert rows[0]["phase"] == "start" and len(rows) >= 2
    # the duality measure never increases along the run
    mus = [float(r["mu_bar"]) for r in rows]
    assert all(b <= a for a, b in zip(mus, mus[1:]))
    summary = json.loads(out.read_text())
    assert summary["segments"] >= summary["iterations"] >= summary["lower_bound"]


def test_verify_catches_mutation(monkeypatch):
    def bad_x(r, lam):
        x = list(trop_path_x(r, lam))
        x[-1] += F(1, 64)
        return TropPoint(x)

    name, _ = verify.CRITERIA[1]
    monkeypatch.setitem(verify.CRITERIA, 1, (name, lambda level: verify.check_table1(x_fn=bad_x)))
    code, results = verify.verify_suite("fast", only={1}, echo=None)
    assert code == 1 and not results[0].passed
