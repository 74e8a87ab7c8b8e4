"""Command line entry point.

    gencal check --scenario f.json [--tol 1e-7] [--mode exact]
    gencal suite [--suite all] [--seed 0]
    gencal tdualize --scenario f.json [--direction n] [--out dual.json]

Exit codes: 0 success, 1 an expectation or property failed, 2 the input
could not be parsed, 3 the input parsed but is invalid.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from fractions import Fraction

import numpy as np

from . import __version__, linalg, scenario, suites
from .calibration import EQUALITY_TOL, is_calibrated, spinor_criterion
from .dirac import detect_chirality
from .errors import GencalError
from .exterior import Form
from .fieldforms import format_polyform, parse_polyform, tdual_intertwine_check
from .scenario import PairSpec, Scenario, ScenarioParseError, ScenarioValidationError
from .tduality import DualityContext, rank_shift, tdualize_dilaton, tdualize_metric, tdualize_pair, tdualize_spinor

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3

# coefficients closer than this to a small-denominator rational are snapped in exact output
_SNAP_TOL = 1e-12


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _float(x) -> float:
    x = float(x)
    return 0.0 if x == 0 else x


# -------------------------------------------------------------------- check

def _expectations(expect: dict, report, residual: float | None, tol: float) -> list[dict]:
    results = []
    if "calibrated" in expect:
        results.append({"key": "calibrated", "expected": expect["calibrated"], "actual": report.calibrated,
                        "ok": expect["calibrated"] == report.calibrated})
    if "deficit" in expect:
        allowed = expect.get("deficit_tol", tol)
        ok = abs(report.deficit - expect["deficit"]) <= allowed
        results.append({"key": "deficit", "expected": expect["deficit"], "actual": _float(report.deficit),
                        "ok": bool(ok)})
    if "spinor_residual_below" in expect:
        ok = residual is not None and residual < expect["spinor_residual_below"]
        results.append({"key": "spinor_residual_below", "expected": expect["spinor_residual_below"],
                        "actual": residual, "ok": bool(ok)})
    return results


def run_check(sc: Scenario, tol: float = EQUALITY_TOL) -> dict:
    """Calibration report for every pair, plus the field check when present."""
    rho = sc.calibration_form()
    dilaton = sc.dilaton if sc.dilaton is not None else (Fraction(0) if sc.exact else 0.0)
    pairs = []
    for spec in sorted(sc.pairs, key=lambda s: s.id):
        p = spec.pair
        entry: dict = {"id": spec.id, "k": p.k}
        if rho is None:
            entry["error"] = "no calibration form"
            entry["ok"] = False
            pairs.append(entry)
            continue
        part = rho.even() if p.k % 2 == 0 else rho.odd()
        report = is_calibrated(part, sc.metric, p, tol, dilaton)
        entry.update({
            "pairing_value": _float(report.pairing_value),
            "bound_value": _float(report.bound_value),
            "deficit": _float(report.deficit),
            "calibrated": report.calibrated,
            "orientation": report.orientation,
            "exact": report.exact,
        })
        residual = None
        if sc.spinors is not None and (sc.n % 2 or _chiral(sc)):
            residual = _float(spinor_criterion(*sc.spinors, sc.metric.to_float(), p.to_float()))
            entry["spinor_residual"] = residual
        checks = _expectations(spec.expect, report, residual, tol)
        entry["expectations"] = checks
        entry["ok"] = all(c["ok"] for c in checks)
        pairs.append(entry)
    out = {"schema_version": scenario.SCHEMA_VERSION, "scenario": sc.name, "mode": sc.mode, "tol": tol,
           "pairs": pairs}
    ok = all(e["ok"] for e in pairs)
    if sc.field is not None:
        field = _check_field(sc)
        out["field"] = field
        ok = ok and field["ok"]
    out["ok"] = ok
    return out


def _chiral(sc: Scenario) -> bool:
    return detect_chirality(sc.spinors[1]) is not None


def _check_field(sc: Scenario) -> dict:
    f = sc.field
    n = sc.n
    forms = [parse_polyform(getattr(f, key), n) for key in ("rho0", "rho1", "phi0", "phi1")]
    theta = parse_polyform(f.theta, n)
    tint, tint2 = tdual_intertwine_check(*forms, parse_polyform(f.dilaton, n), theta, f.direction)
    checks = [{"key": key, "expected": f.expect[key], "actual": actual, "ok": f.expect[key] == actual}
              for key, actual in (("tint", tint), ("tint2", tint2)) if key in f.expect]
    return {"tint": tint, "tint2": tint2, "expectations": checks, "ok": all(c["ok"] for c in checks)}


# -------------------------------------------------------------- tdualize

def _snap(a: Form) -> Form:
    """Rationalise a float form whose coefficients are small-denominator rationals."""
    a = a.to_float()
    if a.is_complex:
        if np.max(np.abs(a.coeffs.imag), initial=0.0) > _SNAP_TOL:
            raise ScenarioValidationError("calibration", "the calibration form has an imaginary part")
        a = a.real
    coeffs = []
    for c in a.coeffs:
        q = Fraction(float(c)).limit_denominator(10_000)
        if abs(float(q) - c) > _SNAP_TOL:
            raise ScenarioValidationError("calibration", f"coefficient {c!r} is not a simple rational")
        coeffs.append(q)
    return Form(a.dim, np.array(coeffs, dtype=object))


def _chop(a: Form) -> Form:
    a = a.to_float().real
    return Form(a.dim, np.where(np.abs(a.coeffs) > _SNAP_TOL, a.coeffs, 0.0))


def _context(sc: Scenario, direction: int | None) -> DualityContext:
    if direction is not None:
        if not 1 <= direction <= sc.n:
            raise ScenarioValidationError("direction", f"must lie in 1..{sc.n}")
        return DualityContext.coordinate(sc.n, direction, exact=sc.exact)
    if sc.duality is None:
        raise ScenarioValidationError("duality", "give --direction or a duality section")
    return sc.duality


def tdualize_scenario(sc: Scenario, direction: int | None = None) -> tuple[Scenario, list[str]]:
    """The dual scenario and a log of the pair dimension changes."""
    ctx = _context(sc, direction)
    log = []
    G = sc.metric
    dual_metric = tdualize_metric(G, ctx)
    dilaton = sc.dilaton
    if dilaton is not None:
        dilaton = tdualize_dilaton(dilaton, G.g if sc.exact else linalg.to_float(G.g), ctx)
    calibration = sc.calibration
    spinors, kind = sc.spinors, sc.spinor_kind
    if calibration is not None:
        rho = sc.calibration_form()
        if calibration == "fierz":
            rho = _snap(rho) if sc.exact else _chop(rho)
            log.append("calibration: fierz form written out explicitly; spinors dropped")
        elif spinors is not None:
            log.append("spinors dropped; the calibration form carries the structure")
        calibration = tdualize_spinor(rho, ctx)
        spinors, kind = None, None
    pairs = []
    for spec in sc.pairs:
        p = spec.pair
        dual = tdualize_pair(p, G, ctx)
        shift = rank_shift(p, ctx)
        log.append(f"pair {spec.id}: k {p.k} -> {dual.k} ({'+1' if shift > 0 else '-1'})")
        if sc.exact and not dual.exact:
            raise ScenarioValidationError(f"pairs.{spec.id}", "exact dualisation lost exactness")
        pairs.append(PairSpec(spec.id, dual))
    field = sc.field
    if field is not None:
        n = sc.n
        r0, r1, f0, f1 = (parse_polyform(getattr(field, k), n) for k in ("rho0", "rho1", "phi0", "phi1"))
        field = replace(field, rho0=format_polyform(-r1), rho1=format_polyform(-r0),
                        phi0=format_polyform(-f1), phi1=format_polyform(-f0), expect={})
    dual = replace(sc, metric=dual_metric, dilaton=dilaton, calibration=calibration, spinors=spinors,
                   spinor_kind=kind, pairs=pairs, field=field)
    return dual, log


# -------------------------------------------------------------------- main

def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gencal", description="Generalised calibrations workbench")
    parser.add_argument("--version", action="version", version=f"gencal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="report calibration data for every pair of a scenario")
    check.add_argument("--scenario", required=True)
    check.add_argument("--tol", type=float, default=EQUALITY_TOL)
    check.add_argument("--mode", choices=["float", "exact"])
    check.add_argument("--out")

    suite = sub.add_parser("suite", help="run the property batteries of one module or all of them")
    suite.add_argument("--suite", default="all", choices=list(suites.MODULES) + ["all"])
    suite.add_argument("--seed", type=int, default=0)
    suite.add_argument("--out")

    dual = sub.add_parser("tdualize", help="write the T-dual scenario")
    dual.add_argument("--scenario", required=True)
    dual.add_argument("--direction", type=int)
    dual.add_argument("--mode", choices=["float", "exact"])
    dual.add_argument("--out")
    return parser


def _load(args) -> Scenario:
    return scenario.load(args.scenario, args.mode)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "suite":
            return _suite(args)
        sc = _load(args)
        if args.command == "check":
            report = run_check(sc, args.tol)
            _emit(scenario.dumps(report), args.out)
            return EXIT_OK if report["ok"] else EXIT_FAILED
        dual, log = tdualize_scenario(sc, args.direction)
        for line in log:
            print(line, file=sys.stderr)
        _emit(scenario.dumps(scenario.to_dict(dual)), args.out)
        return EXIT_OK
    except (ScenarioParseError, OSError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ScenarioValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GencalError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def _suite(args) -> int:
    outcomes = suites.run(args.suite, args.seed)
    failed = [o for o in outcomes if not o.passed]
    report = {
        "suite": args.suite,
        "seed": args.seed,
        "passed": len(outcomes) - len(failed),
        "failed": len(failed),
        "properties": [o.to_dict() for o in outcomes],
    }
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    for o in outcomes:
        status = "PASS" if o.passed else "FAIL"
        print(f"{status} {o.module}.{o.name} cases={o.cases} seed={o.seed}", file=sys.stderr)
    if failed:
        first = failed[0]
        print(f"first counterexample ({first.module}.{first.name}, seed {first.seed}): {first.message}",
              file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
