"""Config-driven scenario runner.

    beurling-lab run <config.json> [--out DIR] [--format csv|json]
    beurling-lab list-builtins

Exit codes: 0 pass, 1 fail or inconclusive, 2 invalid config or expression,
3 numerical failure at run time, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .asymptotics import ConvergenceReport, TGrid, XSchedule
from .brv import (RatioField, cocycle_profile, estimate_index, estimate_karamata_index,
                  karamata_uct_profile, uct_profile)
from .errors import BeurlingLabError, ConfigError, ParseError
from .flow import compare_reach_times, embedding_residual, integrate_flow, reach_time
from .funcspace import FAMILIES, FamilySpec, RealFunc, builtin_family, identity_x, parse_expr
from .interp import bloom_partition, interpolate_c1, smooth_rep_check
from .represent import (GammaRepresentation, build_gamma, decompose, extract_components,
                        make_f_rho, rep_to_json, verify_reduction)
from .sn_check import check_karamata_additive, check_little_o, check_phi_slow, check_sn

__all__ = ["Scenario", "ReportBundle", "load_scenario", "run_scenario", "emit_report", "main"]

KINDS = ("check-sn", "check-slow", "estimate-index", "uct", "cocycle", "flow", "time-measure",
         "represent", "decompose", "interpolate", "crosscheck-proposition", "karamata-mode")
FUNCTION_KEYS = ("f", "phi", "psi", "d", "e")
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class Scenario:
    kind: str
    name: str
    functions: dict[str, RealFunc]
    grid: TGrid | None
    schedule: XSchedule
    tol: float
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class ReportBundle:
    scenario: str
    name: str
    verdict: str
    summary: dict[str, Any]
    tables: dict[str, tuple[list[str], list[list[Any]]]] = field(default_factory=dict)
    documents: dict[str, str] = field(default_factory=dict)  # extra files, name -> text

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.verdict == "pass" else EXIT_FAIL


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def _function(key: str, spec: Any) -> RealFunc:
    # e components are integrated from 0, so they default to the whole line
    default_domain = (-math.inf, math.inf) if key == "e" else (0.0, math.inf)
    positive = key != "e"
    if isinstance(spec, str):
        if spec in FAMILIES:
            return builtin_family(FamilySpec(spec, {}))
        return parse_expr(spec, domain=default_domain, positive=positive)
    if isinstance(spec, dict):
        if "builtin" in spec:
            params = {k: v for k, v in spec.items() if k != "builtin"}
            return builtin_family(FamilySpec(str(spec["builtin"]), params))
        if "expr" in spec:
            dom = spec.get("domain", default_domain)
            if not (isinstance(dom, (list, tuple)) and len(dom) == 2):
                raise ConfigError(f"{key}: domain must be a pair [lo, hi]")
            lo = -math.inf if dom[0] is None else float(dom[0])
            hi = math.inf if dom[1] is None else float(dom[1])
            return parse_expr(spec["expr"], domain=(lo, hi), positive=positive)
    raise ConfigError(f"{key}: expected an expression string, a builtin name, "
                      f"{{'builtin': ...}} or {{'expr': ...}}")


def _positive(name: str, value: Any) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise ConfigError(f"{name} must be positive, got {value!r}")
    return v


def load_scenario(doc: dict[str, Any]) -> Scenario:
    """Validate a config document; every error is a ConfigError or ParseError."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    kind = doc.get("scenario")
    if kind not in KINDS:
        raise ConfigError(f"scenario must be one of {', '.join(KINDS)}; got {kind!r}")
    try:
        functions = {k: _function(k, doc[k]) for k in FUNCTION_KEYS if k in doc}
        grid = None
        if "grid" in doc:
            g = doc["grid"]
            grid = TGrid(float(g.get("lo", -2.0)), float(g.get("hi", 2.0)),
                         _positive("grid.step", g.get("step", 0.1)))
        s = doc.get("schedule", {})
        schedule = XSchedule(float(s.get("x0", 1e2)), float(s.get("ratio", 2.0)),
                             s.get("count", 20))
    except ParseError:
        raise
    except (TypeError, AttributeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    tol = _positive("tol", doc.get("tol", 1e-2))
    params = dict(doc.get("params", {}))
    for key in ("rho",):
        if key in doc:
            params[key] = doc[key]
    if "rho" in params:
        try:
            params["rho"] = float(params["rho"])
        except (TypeError, ValueError):
            raise ConfigError(f"rho must be a number, got {params['rho']!r}") from None
    return Scenario(kind, str(doc.get("name", kind)), functions, grid, schedule, tol, params)


def _require(sc: Scenario, *keys: str) -> list[RealFunc]:
    missing = [k for k in keys if k not in sc.functions]
    if missing:
        raise ConfigError(f"{sc.kind} needs function(s): {', '.join(missing)}")
    return [sc.functions[k] for k in keys]


def _subject(sc: Scenario) -> RealFunc:
    """f from the config, or f_rho built from rho and phi."""
    if "f" in sc.functions:
        return sc.functions["f"]
    if "rho" in sc.params:
        return make_f_rho(sc.params["rho"], sc.functions["phi"])
    raise ConfigError(f"{sc.kind} needs f, or rho to build f_rho")


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

PROFILE_COLUMNS = ["x", "sup_deviation", "n_skipped"]


def _profile(report: ConvergenceReport):
    return PROFILE_COLUMNS, [[p.x, p.sup_deviation, p.n_skipped] for p in report.per_x]


def _summary(sc: Scenario, verdict: str, report: ConvergenceReport | None = None,
             rho: float | None = None, **details) -> dict[str, Any]:
    out = {
        "scenario": sc.kind,
        "verdict": verdict,
        "extrapolated_limit": report.extrapolated_limit if report else None,
        "rho": rho,
        "decay_exponent": report.decay_exponent if report else None,
        "tolerance": sc.tol,
    }
    if report is not None:
        details.setdefault("reason", report.reason)
        details.setdefault("note", report.note)
    if details:
        out["details"] = details
    return out


def _from_report(sc: Scenario, report: ConvergenceReport, rho=None, **details) -> ReportBundle:
    return ReportBundle(sc.kind, sc.name, report.verdict,
                        _summary(sc, report.verdict, report, rho, **details),
                        {"profile": _profile(report)})


def _run_check_sn(sc):
    (phi,) = _require(sc, "phi")
    v = check_sn(phi, sc.grid or TGrid(), sc.schedule, sc.tol)
    return _from_report(sc, v.report, lower_bound=v.lower_bound)


def _run_check_slow(sc):
    mode = sc.params.get("mode", "phi_slow")
    K = sc.grid or TGrid()
    if mode == "phi_slow":
        psi, phi = _require(sc, "psi", "phi")
        v = check_phi_slow(psi, phi, K, sc.schedule, sc.tol)
    elif mode == "karamata_additive":
        (phi,) = _require(sc, "phi")
        v = check_karamata_additive(phi, K, sc.schedule, sc.tol)
    elif mode == "little_o":
        (phi,) = _require(sc, "phi")
        v = check_little_o(phi, sc.schedule, sc.tol)
    elif mode == "sn_implication":
        # phi-slow (psi = phi) together with o(x) should come with self-neglect
        (phi,) = _require(sc, "phi")
        slow = check_phi_slow(phi, phi, K, sc.schedule, sc.tol)
        small = check_little_o(phi, sc.schedule, sc.tol)
        sn = check_sn(phi, K, sc.schedule, sc.tol)
        premise = slow.passed and small.passed
        consistent = (not premise) or sn.passed
        verdict = "pass" if consistent else "fail"
        return ReportBundle(sc.kind, sc.name, verdict,
                            _summary(sc, verdict, sn.report, None, mode=mode,
                                     phi_slow=slow.verdict, little_o=small.verdict,
                                     sn=sn.verdict, premise_holds=premise,
                                     vacuous=not premise),
                            {"profile": _profile(sn.report)})
    else:
        raise ConfigError(f"unknown check-slow mode {mode!r}")
    return _from_report(sc, v.report, mode=mode, lower_bound=v.lower_bound)


def _index_table(est):
    return ["t", "k", "g"], [[t, k, math.exp(k)] for t, k in est.k_samples]


def _index_verdict(sc, est):
    """pass when the limits solve the additive equation, and match rho if given."""
    ok = est.cfe_max_residual <= sc.tol
    if "expected_rho" in sc.params:
        ok = ok and abs(est.rho - float(sc.params["expected_rho"])) <= sc.tol
    return "pass" if ok else "fail"


def _run_estimate_index(sc):
    (phi,) = _require(sc, "phi")
    f = _subject(sc)
    est = estimate_index(f, phi, sc.grid or TGrid(), sc.schedule)
    verdict = _index_verdict(sc, est)
    return ReportBundle(sc.kind, sc.name, verdict,
                        _summary(sc, verdict, None, est.rho, fit_residual=est.fit_residual,
                                 cfe_max_residual=est.cfe_max_residual),
                        {"limits": _index_table(est)})


def _rho_for(sc, f, phi, K):
    if "rho" in sc.params:
        return sc.params["rho"]
    return estimate_index(f, phi, K, sc.schedule).rho


def _run_uct(sc):
    (phi,) = _require(sc, "phi")
    f = _subject(sc)
    K = sc.grid or TGrid(-1.0, 1.0, 0.1)
    rho = _rho_for(sc, f, phi, TGrid())
    return _from_report(sc, uct_profile(f, phi, rho, K, sc.schedule, sc.tol), rho)


def _run_cocycle(sc):
    (phi,) = _require(sc, "phi")
    f = sc.functions.get("f", phi)
    report = cocycle_profile(RatioField(f, phi), sc.grid or TGrid(-1.0, 1.0, 0.1),
                             sc.schedule, sc.tol)
    return _from_report(sc, report)


def _run_flow(sc):
    (phi,) = _require(sc, "phi")
    p = sc.params
    x0 = _positive("params.x0", p.get("x0", 1.0))
    t_end = float(p.get("t_end", 1.0))
    step_tol = _positive("params.ode_tol", p.get("ode_tol", 1e-10))
    traj = integrate_flow(phi, x0, t_end, step_tol)
    details = {"x0": x0, "t_end": traj.t_end, "u_end": traj.u_end, "n_steps": traj.n_steps,
               "n_rejected": traj.n_rejected, "max_error_estimate": traj.max_error_estimate}
    verdict = "pass"
    if "s" in p and "t" in p:
        res = embedding_residual(phi, x0, float(p["s"]), float(p["t"]), step_tol)
        details["embedding_residual"] = res
        verdict = "pass" if res <= sc.tol else "fail"
    return ReportBundle(sc.kind, sc.name, verdict, _summary(sc, verdict, None, None, **details),
                        {"trajectory": (["t", "u"], [list(s) for s in traj.samples])})


def _run_time_measure(sc):
    (phi,) = _require(sc, "phi")
    xs = [_positive("params.xs", x) for x in sc.params.get("xs", [4.0, 1e2, 1e4])]
    ode_tol = _positive("params.ode_tol", sc.params.get("ode_tol", 1e-10))
    rows, worst = [], 0.0
    for x in xs:
        cmp = compare_reach_times(phi, x)
        reach = reach_time(phi, 1.0, x, ode_tol) if x > 1 else (
            0.0 if x == 1 else -reach_time(phi, x, 1.0, ode_tol))
        gap = abs(reach - cmp.tau)
        worst = max(worst, gap)
        rows.append([x, cmp.tau, reach, gap, cmp.preaction_time, cmp.ratio])
    verdict = "pass" if worst <= sc.tol else "fail"
    return ReportBundle(sc.kind, sc.name, verdict,
                        _summary(sc, verdict, None, None, max_reach_gap=worst),
                        {"times": (["x", "tau", "reach_time", "abs_gap", "x_over_phi",
                                    "tau_over_x_over_phi"], rows)})


def _run_represent(sc):
    (phi,) = _require(sc, "phi")
    if "rho" not in sc.params:
        raise ConfigError("represent needs rho")
    rho = sc.params["rho"]
    rep = GammaRepresentation(rho, phi, sc.functions.get("d"), sc.functions.get("e"))
    f = build_gamma(rep)
    est = estimate_index(f, phi, sc.grid or TGrid(), sc.schedule)
    rho_tol = float(sc.params.get("rho_tol", 2e-2))
    ok = abs(est.rho - rho) <= rho_tol
    details = {"rho_estimate": est.rho, "rho_tol": rho_tol, "cfe_max_residual": est.cfe_max_residual}
    report = None
    if rep.e_component is not None:
        report = verify_reduction(rep.e_component, phi, sc.grid or TGrid(), sc.schedule, sc.tol)
        ok = ok and report.passed
        details["reduction_verdict"] = report.verdict
    verdict = "pass" if ok else "fail"
    tables = {"limits": _index_table(est)}
    if report is not None:
        tables["reduction"] = _profile(report)
    docs = {}
    try:
        docs["representation.json"] = rep_to_json(rep)
    except ConfigError:
        pass
    return ReportBundle(sc.kind, sc.name, verdict, _summary(sc, verdict, report, rho, **details),
                        tables, docs)


def _run_decompose(sc):
    (phi,) = _require(sc, "phi")
    f = _subject(sc)
    rho = _rho_for(sc, f, phi, sc.grid or TGrid())
    xs = sc.schedule.points
    x1 = float(sc.params.get("x1", 1.0 if phi.in_domain(1.0) else max(phi.domain[0] + 1, 2.0)))
    horizon = float(sc.params.get("horizon", 1.1 * xs[-1]))
    part = bloom_partition(phi, x1, horizon, int(sc.params.get("max_knots", 1_000_000)))
    if not part.diverged:
        raise ConfigError("partition did not reach the schedule; raise max_knots or x1")
    dec = decompose(f, phi, rho)
    rep = extract_components(dec, part)
    g = build_gamma(rep)
    upper = xs[len(xs) // 2:]
    worst = max(abs(math.expm1(g.log_eval(x) - f.log_eval(x))) for x in upper)
    verdict = "pass" if worst <= float(sc.params.get("rel_tol", 1e-2)) else "fail"
    rows = [[x, c, rep.e_component(x)] for x, c in rep.c_samples]
    return ReportBundle(sc.kind, sc.name, verdict,
                        _summary(sc, verdict, None, rho, max_relative_error_upper_half=worst,
                                 knots=len(part), d_at_last_knot=math.exp(rep.c_samples[-1][1])),
                        {"components": (["x", "c", "e"], rows)})


def _run_interpolate(sc):
    (phi,) = _require(sc, "phi")
    psi = sc.functions.get("psi", phi)
    xs = sc.schedule.points
    x1 = float(sc.params.get("x1", 1.0))
    horizon = float(sc.params.get("horizon", 1.1 * xs[-1]))
    part = bloom_partition(phi, x1, horizon, int(sc.params.get("max_knots", 1_000_000)))
    interp = interpolate_c1(psi, part)
    c_rep, e_rep = smooth_rep_check(psi, interp, phi, sc.schedule, sc.tol)
    verdict = "pass" if c_rep.passed and e_rep.passed else (
        "fail" if "fail" in (c_rep.verdict, e_rep.verdict) else "inconclusive")
    rows = [list(row) for row in interp.coefficients()]
    return ReportBundle(sc.kind, sc.name, verdict,
                        _summary(sc, verdict, e_rep, None, ratio_verdict=c_rep.verdict,
                                 log_slope_verdict=e_rep.verdict, knots=len(part),
                                 diverged=part.diverged),
                        {"knots": (["x_left", "x_right", "c0", "c2", "c3", "slope_bound"], rows),
                         "ratio_profile": _profile(c_rep), "log_slope_profile": _profile(e_rep)})


def _run_crosscheck(sc):
    (phi,) = _require(sc, "phi")
    f = _subject(sc)
    rho = _rho_for(sc, f, phi, TGrid())
    uct = uct_profile(f, phi, rho, sc.grid or TGrid(-1.0, 1.0, 0.1), sc.schedule, sc.tol)
    sn = check_sn(phi, sc.grid or TGrid(), sc.schedule, sc.tol)
    premise = uct.passed and rho != 0
    consistent = (not premise) or sn.passed
    verdict = "pass" if consistent else "fail"
    return ReportBundle(sc.kind, sc.name, verdict,
                        _summary(sc, verdict, uct, rho, uct_verdict=uct.verdict,
                                 sn_verdict=sn.verdict, premise_holds=premise,
                                 vacuous=not premise, consistent=consistent),
                        {"profile": _profile(uct), "sn_profile": _profile(sn.report)})


def _run_karamata(sc):
    phi = sc.functions.get("phi", identity_x())
    (f,) = _require(sc, "f")
    K = sc.grid or TGrid(-0.5, 2.0, 0.1)
    est = estimate_karamata_index(f, phi, K, sc.schedule)
    rho = sc.params.get("rho", est.rho)
    rows, worst = [], 0.0
    for t, k in est.k_samples:
        g, target = math.exp(k), (1.0 + t) ** rho
        worst = max(worst, abs(g - target))
        rows.append([t, g, target, abs(g - target)])
    uct = karamata_uct_profile(f, phi, rho, K, sc.schedule, sc.tol)
    verdict = "pass" if worst <= sc.tol else "fail"
    return ReportBundle(sc.kind, sc.name, verdict,
                        _summary(sc, verdict, uct, est.rho, max_limit_error=worst,
                                 uct_verdict=uct.verdict, cfe_max_residual=est.cfe_max_residual),
                        {"limits": (["t", "g", "target", "abs_error"], rows),
                         "profile": _profile(uct)})


RUNNERS: dict[str, Callable[[Scenario], ReportBundle]] = {
    "check-sn": _run_check_sn, "check-slow": _run_check_slow,
    "estimate-index": _run_estimate_index, "uct": _run_uct, "cocycle": _run_cocycle,
    "flow": _run_flow, "time-measure": _run_time_measure, "represent": _run_represent,
    "decompose": _run_decompose, "interpolate": _run_interpolate,
    "crosscheck-proposition": _run_crosscheck, "karamata-mode": _run_karamata,
}


def run_scenario(config: Scenario | dict[str, Any]) -> ReportBundle:
    sc = config if isinstance(config, Scenario) else load_scenario(config)
    return RUNNERS[sc.kind](sc)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _clean(value):
    """JSON-safe copy: non-finite floats become null."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_to_csv(columns: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def summary_json(bundle: ReportBundle) -> str:
    return json.dumps(_clean(bundle.summary), indent=2, allow_nan=False) + "\n"


def emit_report(bundle: ReportBundle, out_dir: str | Path, fmt: str = "csv") -> list[Path]:
    """Write the bundle under out_dir; returns the written paths.

    csv: ``<name>.csv`` for the first table, ``<name>.<table>.csv`` for the
    rest and ``<name>.summary.json``.  json: one ``<name>.json`` holding the
    summary and every table.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}
    if fmt == "csv":
        for i, (tname, (cols, rows)) in enumerate(bundle.tables.items()):
            fname = f"{bundle.name}.csv" if i == 0 else f"{bundle.name}.{tname}.csv"
            files[fname] = table_to_csv(cols, rows)
        files[f"{bundle.name}.summary.json"] = summary_json(bundle)
    else:
        doc = {"summary": bundle.summary,
               "tables": {k: {"columns": c, "rows": r} for k, (c, r) in bundle.tables.items()}}
        files[f"{bundle.name}.json"] = json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"
    for dname, text in bundle.documents.items():
        files[f"{bundle.name}.{dname}"] = text
    written = []
    for fname, text in files.items():
        path = out / fname
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="beurling-lab",
                                 description="Numerical checks for Beurling regular variation.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario from a JSON config")
    run.add_argument("config", help="path to the scenario JSON")
    run.add_argument("--out", default=".", help="output directory (default: current)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_parser("list-builtins", help="list the built-in function families")
    return ap


def _list_builtins() -> int:
    for name, (_, params) in FAMILIES.items():
        desc = ", ".join(f"{k}: {v}" for k, v in params.items()) or "no parameters"
        print(f"{name}\t{desc}")
    return EXIT_PASS


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_PASS
    if args.command == "list-builtins":
        return _list_builtins()
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        doc = json.loads(text)
        scenario = load_scenario(doc)
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON in {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        bundle = run_scenario(scenario)
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BeurlingLabError, ArithmeticError, ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        emit_report(bundle, args.out, args.format)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(summary_json(bundle))
    return bundle.exit_code


if __name__ == "__main__":
    sys.exit(main())
