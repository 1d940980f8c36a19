import csv
import json
import math

import pytest

from beurling_lab.cli import (ReportBundle, emit_report, load_scenario, main, run_scenario,
                              table_to_csv)
from beurling_lab.errors import ConfigError, ParseError


def _run(tmp_path, doc, *extra, name="cfg.json"):
    cfg = tmp_path / name
    cfg.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    out = tmp_path / "out"
    return main(["run", str(cfg), "--out", str(out), *extra]), out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_check_sn_sqrt_twenty_rows(tmp_path):
    code, out = _run(tmp_path, {"scenario": "check-sn", "name": "sn",
                                "phi": {"builtin": "power_alpha", "alpha": 0.5}})
    assert code == 0
    rows = _rows(out / "sn.csv")
    assert rows[0] == ["x", "sup_deviation", "n_skipped"]
    assert len(rows) == 21
    summary = json.loads((out / "sn.summary.json").read_text())
    assert {"scenario", "verdict", "extrapolated_limit", "rho", "decay_exponent",
            "tolerance"} <= set(summary)
    assert summary["verdict"] == "pass"


def test_check_sn_identity_fails(tmp_path):
    code, _ = _run(tmp_path, {"scenario": "check-sn", "phi": "identity_x"})
    assert code == 1


def test_estimate_index_json(tmp_path, capsys):
    code, out = _run(tmp_path, {"scenario": "estimate-index", "name": "idx",
                                "f": "exp(2*(sqrt(x)-1))", "phi": "sqrt(x)"},
                     "--format", "json")
    assert code == 0
    doc = json.loads((out / "idx.json").read_text())
    assert doc["summary"]["rho"] == pytest.approx(1.0, abs=1e-2)
    assert json.loads(capsys.readouterr().out)["rho"] == doc["summary"]["rho"]


def test_json_round_trip_bit_exact(tmp_path):
    bundle = run_scenario({"scenario": "uct", "name": "u", "phi": "sqrt(x)", "rho": 1.0})
    (path,) = emit_report(bundle, tmp_path, "json")
    doc = json.loads(path.read_text())
    cols, rows = bundle.tables["profile"]
    assert doc["tables"]["profile"]["rows"] == rows
    for a, b in zip(doc["tables"]["profile"]["rows"], rows):
        assert all(float(u).hex() == float(v).hex() for u, v in zip(a, b))
    assert doc["summary"]["decay_exponent"] == bundle.summary["decay_exponent"]


def test_csv_round_trip_bit_exact(tmp_path):
    bundle = run_scenario({"scenario": "check-sn", "name": "s", "phi": "sqrt(x)"})
    emit_report(bundle, tmp_path)
    _, rows = bundle.tables["profile"]
    back = _rows(tmp_path / "s.csv")[1:]
    assert [[float(v) for v in r[:2]] for r in back] == [r[:2] for r in rows]


def test_empty_profile_header_only():
    assert table_to_csv(["x", "sup_deviation", "n_skipped"], []) == "x,sup_deviation,n_skipped\n"


def test_non_finite_summary_values_become_null(tmp_path):
    bundle = ReportBundle("check-sn", "b", "fail",
                          {"scenario": "check-sn", "verdict": "fail", "rho": math.inf},
                          {"profile": (["x"], [])})
    emit_report(bundle, tmp_path)
    assert json.loads((tmp_path / "b.summary.json").read_text())["rho"] is None
    assert (tmp_path / "b.csv").read_text() == "x\n"


def test_byte_determinism_across_workers(tmp_path, monkeypatch):
    doc = {"scenario": "uct", "name": "d", "phi": "sqrt(x)", "rho": 0.5}
    outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("BEURLING_LAB_THREADS", threads)
        (tmp_path / threads).mkdir()
        code, out = _run(tmp_path / threads, doc)
        assert code == 0
        outputs.append(sorted((p.name, p.read_bytes()) for p in out.iterdir()))
    assert outputs[0] == outputs[1]


@pytest.mark.parametrize("doc, code", [
    ("{not json", 2),
    ({"scenario": "nope"}, 2),
    ({"scenario": "check-sn", "phi": "sqrt(x"}, 2),
    ({"scenario": "check-sn", "phi": "sqrt(x)", "tol": -1}, 2),
    ({"scenario": "check-sn"}, 2),
    ({"scenario": "estimate-index", "f": "exp(x)", "phi": "sqrt(x)",
      "grid": {"lo": -1, "hi": 1, "step": 0.5}}, 3),
])
def test_exit_codes(tmp_path, doc, code):
    assert _run(tmp_path, doc)[0] == code


def test_missing_config_is_io_error(tmp_path):
    assert main(["run", str(tmp_path / "missing.json")]) == 4


def test_unwritable_output_is_io_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "check-sn", "phi": "1"}))
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", str(cfg), "--out", str(blocker / "sub")]) == 4


def test_list_builtins(capsys):
    assert main(["list-builtins"]) == 0
    names = {line.split("\t")[0] for line in capsys.readouterr().out.splitlines()}
    assert {"const_c", "power_alpha", "x_over_log", "identity_x", "gamma_rho_builtin"} <= names


def test_load_scenario_validation():
    sc = load_scenario({"scenario": "uct", "phi": {"expr": "x+1", "domain": [0, None]},
                        "rho": "2", "schedule": {"count": 5}})
    assert sc.params["rho"] == 2.0 and len(sc.schedule.points) == 5
    with pytest.raises(ConfigError):
        load_scenario({"scenario": "uct", "rho": "abc"})
    with pytest.raises(ParseError):
        load_scenario({"scenario": "uct", "phi": "x +* 1"})
    with pytest.raises(ConfigError):
        load_scenario([1, 2])


@pytest.mark.parametrize("doc", [
    {"scenario": "check-slow", "psi": "2*sqrt(x)", "phi": "sqrt(x)"},
    {"scenario": "check-slow", "phi": "1", "params": {"mode": "karamata_additive"}},
    {"scenario": "check-slow", "phi": "sqrt(x)", "params": {"mode": "little_o"}},
    {"scenario": "check-slow", "phi": "sqrt(x)", "params": {"mode": "sn_implication"}},
    {"scenario": "uct", "phi": "sqrt(x)", "rho": 1.0},
    {"scenario": "cocycle", "phi": "sqrt(x)", "f": "exp(2*sqrt(x))"},
    {"scenario": "flow", "phi": "sqrt(x)", "params": {"x0": 4, "s": 0.5, "t": 1.0}},
    {"scenario": "time-measure", "phi": "sqrt(x)", "tol": 1e-6},
    {"scenario": "represent", "phi": "sqrt(x)", "rho": 1, "d": "1+1/x", "e": "1/(1+x)"},
    {"scenario": "decompose", "phi": "sqrt(x)", "f": "sqrt(x)", "rho": 0},
    {"scenario": "interpolate", "phi": "sqrt(x)"},
    {"scenario": "crosscheck-proposition", "phi": "sqrt(x)", "rho": 2},
    {"scenario": "karamata-mode", "f": "x^2"},
], ids=lambda d: d["scenario"] + ":" + d.get("params", {}).get("mode", ""))
def test_every_scenario_passes_on_catalog(tmp_path, doc):
    code, out = _run(tmp_path, dict(doc, name="r"))
    assert code == 0
    assert (out / "r.summary.json").exists()


def test_represent_writes_representation(tmp_path):
    _, out = _run(tmp_path, {"scenario": "represent", "name": "r", "phi": "sqrt(x)", "rho": 1,
                             "d": "1+1/x", "e": "1/(1+x)"})
    doc = json.loads((out / "r.representation.json").read_text())
    assert doc["rho"] == 1.0 and doc["phi"] == "sqrt(x)"


def test_karamata_mode_needs_f(tmp_path):
    assert _run(tmp_path, {"scenario": "karamata-mode"})[0] == 2
