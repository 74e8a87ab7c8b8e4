"""Scenario files: loading, validation and canonical serialisation.

A scenario is a JSON document. Numbers may be JSON numbers or strings
such as ``"-3/4"``; in exact mode every number becomes a Fraction. The
writer always emits the canonical layout (sorted keys, two-space indent,
rationals as strings in exact mode), so exact-mode files written by the
tool reproduce byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import jsonschema
import numpy as np

from . import calibration, linalg
from .dirac import DiracSpinor, charge_conj, g2_spinor, spin7_spinor, su3_spinor
from .errors import GencalError
from .exterior import Form, format_form, parse_form
from .fieldforms import MAX_DIM, parse_polyform
from .genmetric import Dilaton, GeneralisedMetric
from .purespinor import IsotropicPair
from .tduality import DualityContext

SCHEMA_VERSION = 1
KINDS = {"G2": 7, "SPIN7": 8, "SU3": 6}

_NUMBER = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*-?\d+(\.\d*)?(/\d+)?\s*$"}]}
_VECTOR = {"type": "array", "items": _NUMBER}
_MATRIX = {"type": "array", "items": _VECTOR}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "n", "metric"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "n": {"type": "integer", "minimum": 1, "maximum": 12},
        "mode": {"enum": ["float", "exact"]},
        "seed": {"type": "integer"},
        "metric": {
            "type": "object",
            "required": ["g"],
            "additionalProperties": False,
            "properties": {"g": _MATRIX, "B": {"oneOf": [_VECTOR, _MATRIX]}},
        },
        "dilaton": {"oneOf": [
            _NUMBER,
            {"type": "object", "additionalProperties": False, "required": ["constant", "log_arg"],
             "properties": {"constant": _NUMBER, "log_arg": _NUMBER}},
        ]},
        "spinors": {"oneOf": [
            {"type": "object", "additionalProperties": False, "required": ["kind"],
             "properties": {"kind": {"enum": sorted(KINDS)}}},
            {"type": "object", "additionalProperties": False, "required": ["left", "right"],
             "properties": {"left": _VECTOR, "right": _VECTOR}},
        ]},
        "calibration": {"oneOf": [
            {"const": "fierz"},
            {"type": "object", "additionalProperties": False, "required": ["form"],
             "properties": {"form": {"type": "string"}}},
        ]},
        "pairs": {"type": "array", "items": {
            "type": "object",
            "additionalProperties": False,
            "required": ["id", "L"],
            "properties": {
                "id": {"type": "string"},
                "L": _MATRIX,
                "F": _VECTOR,
                "orientation": {"enum": [1, -1]},
                "expect": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "calibrated": {"type": "boolean"},
                        "deficit": {"type": "number"},
                        "deficit_tol": {"type": "number", "minimum": 0},
                        "spinor_residual_below": {"type": "number", "minimum": 0},
                    },
                },
            },
        }},
        "duality": {
            "type": "object", "additionalProperties": False, "required": ["X", "theta"],
            "properties": {"X": _VECTOR, "theta": _VECTOR},
        },
        "field": {
            "type": "object",
            "additionalProperties": False,
            "required": ["rho0", "rho1", "phi0", "phi1", "theta"],
            "properties": {
                "rho0": {"type": "string"},
                "rho1": {"type": "string"},
                "phi0": {"type": "string"},
                "phi1": {"type": "string"},
                "dilaton": {"type": "string"},
                "theta": {"type": "string"},
                "direction": {"type": "integer", "minimum": 1},
                "expect": {
                    "type": "object", "additionalProperties": False,
                    "properties": {"tint": {"type": "boolean"}, "tint2": {"type": "boolean"}},
                },
            },
        },
    },
}


class ScenarioParseError(GencalError, ValueError):
    """The file is not well-formed JSON or a literal inside it does not parse."""


class ScenarioValidationError(GencalError, ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class PairSpec:
    id: str
    pair: IsotropicPair
    expect: dict = field(default_factory=dict)


@dataclass
class FieldSpec:
    rho0: str
    rho1: str
    phi0: str
    phi1: str
    theta: str
    dilaton: str = "0"
    direction: int | None = None
    expect: dict = field(default_factory=dict)


@dataclass
class Scenario:
    n: int
    mode: str
    metric: GeneralisedMetric
    name: str | None = None
    seed: int | None = None
    dilaton: Dilaton | None = None
    spinor_kind: str | None = None
    spinors: tuple[DiracSpinor, DiracSpinor] | None = None
    calibration: str | Form | None = None
    pairs: list[PairSpec] = field(default_factory=list)
    duality: DualityContext | None = None
    field: FieldSpec | None = None
    b_layout: str = "upper"

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def calibration_form(self) -> Form | None:
        if self.calibration is None:
            return None
        if isinstance(self.calibration, Form):
            return self.calibration
        if self.spinors is None:
            raise ScenarioValidationError("calibration", "'fierz' needs a spinors section")
        return calibration.calibration_form(*self.spinors, self.metric.to_float() if self.metric.exact else self.metric)


# ------------------------------------------------------------------ loading

def _number(value, exact: bool, path: str):
    try:
        if exact:
            return Fraction(str(value).strip()) if not isinstance(value, int) else Fraction(value)
        if isinstance(value, str):
            return float(Fraction(value.strip()))
        return float(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ScenarioValidationError(path, f"not a number: {value!r}") from exc


def _array(values, exact: bool, path: str) -> np.ndarray:
    if values and isinstance(values[0], list):
        widths = {len(row) for row in values}
        if len(widths) > 1:
            raise ScenarioValidationError(path, "rows have different lengths")
        out = [[_number(v, exact, f"{path}[{i}][{j}]") for j, v in enumerate(row)] for i, row in enumerate(values)]
    else:
        out = [_number(v, exact, f"{path}[{i}]") for i, v in enumerate(values)]
    arr = np.array(out, dtype=object if exact else float)
    return arr


def _skew_from_upper(values, n: int, exact: bool, path: str) -> np.ndarray:
    expected = n * (n - 1) // 2
    if len(values) != expected:
        raise ScenarioValidationError(path, f"expected {expected} strict upper-triangle entries, got {len(values)}")
    return linalg.skew_from_upper(list(values), n, exact=exact)


def parse(text: str, mode: str | None = None) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"invalid JSON: {exc}") from exc
    return from_dict(data, mode)


def load(path, mode: str | None = None) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), mode)


def _schema_path(err: jsonschema.ValidationError) -> str:
    out = ""
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def from_dict(data: Any, mode: str | None = None) -> Scenario:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(list(e.absolute_path)), str(e.absolute_path)))
    if errors:
        err = errors[0]
        raise ScenarioValidationError(_schema_path(err), err.message)
    n = data["n"]
    mode = mode or data.get("mode", "float")
    exact = mode == "exact"

    g = _array(data["metric"]["g"], exact, "metric.g")
    if g.shape != (n, n):
        raise ScenarioValidationError("metric.g", f"expected an {n}x{n} matrix")
    b_layout = "upper"
    raw_B = data["metric"].get("B")
    if raw_B is None:
        B = linalg.skew_from_upper([0] * (n * (n - 1) // 2), n, exact=exact)
    elif raw_B and isinstance(raw_B[0], list):
        b_layout = "matrix"
        B = _array(raw_B, exact, "metric.B")
        if B.shape != (n, n):
            raise ScenarioValidationError("metric.B", f"expected an {n}x{n} matrix")
        if not linalg.is_skew(B, 1e-12):
            raise ScenarioValidationError("metric.B", "B must be skew-symmetric")
    else:
        B = _skew_from_upper([_number(v, exact, f"metric.B[{i}]") for i, v in enumerate(raw_B)], n, exact,
                             "metric.B")
    try:
        metric = GeneralisedMetric(g, B)
    except GencalError as exc:
        raise ScenarioValidationError("metric.g", str(exc)) from exc

    sc = Scenario(n=n, mode=mode, metric=metric, name=data.get("name"), seed=data.get("seed"), b_layout=b_layout)

    if "dilaton" in data:
        raw = data["dilaton"]
        if isinstance(raw, dict):
            const = _number(raw["constant"], exact, "dilaton.constant")
            arg = _number(raw["log_arg"], exact, "dilaton.log_arg")
            if arg <= 0:
                raise ScenarioValidationError("dilaton.log_arg", "must be positive")
            sc.dilaton = Dilaton(const, arg)
        else:
            sc.dilaton = Dilaton(_number(raw, exact, "dilaton"), Fraction(1) if exact else 1.0)

    if "spinors" in data:
        sc.spinors, sc.spinor_kind = _load_spinors(data["spinors"], n)

    if "calibration" in data:
        raw = data["calibration"]
        if raw == "fierz":
            if sc.spinors is None:
                raise ScenarioValidationError("calibration", "'fierz' needs a spinors section")
            sc.calibration = "fierz"
        else:
            try:
                sc.calibration = parse_form(raw["form"], n, exact=exact)
            except ValueError as exc:
                raise ScenarioParseError(f"calibration.form: {exc}") from exc

    seen = set()
    for i, raw in enumerate(data.get("pairs", [])):
        path = f"pairs[{i}]"
        if raw["id"] in seen:
            raise ScenarioValidationError(f"{path}.id", f"duplicate pair id {raw['id']!r}")
        seen.add(raw["id"])
        sc.pairs.append(PairSpec(raw["id"], _load_pair(raw, n, exact, path), dict(raw.get("expect", {}))))

    if "duality" in data:
        X = _array(data["duality"]["X"], exact, "duality.X")
        theta = _array(data["duality"]["theta"], exact, "duality.theta")
        if X.shape != (n,) or theta.shape != (n,):
            raise ScenarioValidationError("duality", f"X and theta need {n} entries")
        try:
            sc.duality = DualityContext(X, theta)
        except GencalError as exc:
            raise ScenarioValidationError("duality", str(exc)) from exc

    if "field" in data:
        raw = data["field"]
        sc.field = FieldSpec(raw["rho0"], raw["rho1"], raw["phi0"], raw["phi1"], raw["theta"],
                             raw.get("dilaton", "0"), raw.get("direction"), dict(raw.get("expect", {})))
        _validate_field(sc.field, n)
    return sc


def _load_spinors(raw: dict, n: int):
    if "kind" in raw:
        kind = raw["kind"]
        if KINDS[kind] != n:
            raise ScenarioValidationError("spinors.kind", f"{kind} structures need n = {KINDS[kind]}")
        if kind == "G2":
            psi = g2_spinor()
            return (psi, psi), kind
        if kind == "SPIN7":
            psi = spin7_spinor()
            return (psi, psi), kind
        psi = su3_spinor()
        return (charge_conj(psi), psi), kind
    size = 2 << (n // 2)
    out = []
    for side in ("left", "right"):
        values = [float(Fraction(str(v))) for v in raw[side]]
        if len(values) != size:
            raise ScenarioValidationError(f"spinors.{side}", f"expected {size} interleaved real/imaginary parts")
        try:
            out.append(DiracSpinor.from_list(n, values))
        except GencalError as exc:
            raise ScenarioValidationError(f"spinors.{side}", str(exc)) from exc
    return tuple(out), None


def _load_pair(raw: dict, n: int, exact: bool, path: str) -> IsotropicPair:
    cols = raw["L"]
    if any(len(c) != n for c in cols):
        raise ScenarioValidationError(f"{path}.L", f"every column needs {n} entries")
    k = len(cols)
    L = _array(cols, exact, f"{path}.L").T if k else np.zeros((n, 0), dtype=object if exact else float)
    L = L.reshape(n, k)
    F_raw = raw.get("F", [0] * (k * (k - 1) // 2))
    F = _skew_from_upper([_number(v, exact, f"{path}.F[{i}]") for i, v in enumerate(F_raw)], k, exact, f"{path}.F") \
        if k else np.zeros((0, 0), dtype=object if exact else float)
    try:
        return IsotropicPair(L, F, raw.get("orientation", 1))
    except GencalError as exc:
        raise ScenarioValidationError(f"{path}.L", str(exc)) from exc


def _validate_field(spec: FieldSpec, n: int) -> None:
    if n > MAX_DIM:
        raise ScenarioValidationError("field", f"polynomial forms support n <= {MAX_DIM}")
    for key in ("rho0", "rho1", "phi0", "phi1", "theta", "dilaton"):
        try:
            parse_polyform(getattr(spec, key), n)
        except ValueError as exc:
            raise ScenarioParseError(f"field.{key}: {exc}") from exc
    if spec.direction is not None and not 1 <= spec.direction <= n:
        raise ScenarioValidationError("field.direction", f"must lie in 1..{n}")


# ------------------------------------------------------------------ writing

def _out_number(x, exact: bool):
    if exact:
        return str(Fraction(x))
    x = float(x)
    return 0.0 if x == 0 else x


def _out_vector(v, exact: bool) -> list:
    return [_out_number(x, exact) for x in v]


def _out_matrix(m, exact: bool) -> list:
    return [_out_vector(row, exact) for row in m]


def to_dict(sc: Scenario) -> dict:
    exact = sc.exact
    out: dict = {"schema_version": SCHEMA_VERSION, "n": sc.n, "mode": sc.mode}
    if sc.name is not None:
        out["name"] = sc.name
    if sc.seed is not None:
        out["seed"] = sc.seed
    metric = {"g": _out_matrix(sc.metric.g, exact)}
    if sc.b_layout == "matrix":
        metric["B"] = _out_matrix(sc.metric.B, exact)
    else:
        metric["B"] = _out_vector(linalg.upper_from_skew(sc.metric.B), exact)
    out["metric"] = metric
    if sc.dilaton is not None:
        out["dilaton"] = {"constant": _out_number(sc.dilaton.constant, exact),
                          "log_arg": _out_number(sc.dilaton.log_arg, exact)}
    if sc.spinors is not None:
        if sc.spinor_kind is not None:
            out["spinors"] = {"kind": sc.spinor_kind}
        else:
            out["spinors"] = {"left": sc.spinors[0].to_list(), "right": sc.spinors[1].to_list()}
    if sc.calibration == "fierz":
        out["calibration"] = "fierz"
    elif isinstance(sc.calibration, Form):
        out["calibration"] = {"form": format_form(sc.calibration)}
    if sc.pairs:
        out["pairs"] = [_pair_dict(spec, exact) for spec in sc.pairs]
    if sc.duality is not None:
        out["duality"] = {"X": _out_vector(sc.duality.X, exact), "theta": _out_vector(sc.duality.theta, exact)}
    if sc.field is not None:
        f = sc.field
        section = {"rho0": f.rho0, "rho1": f.rho1, "phi0": f.phi0, "phi1": f.phi1, "theta": f.theta,
                   "dilaton": f.dilaton}
        if f.direction is not None:
            section["direction"] = f.direction
        if f.expect:
            section["expect"] = dict(f.expect)
        out["field"] = section
    return out


def _pair_dict(spec: PairSpec, exact: bool) -> dict:
    p = spec.pair
    out = {"id": spec.id, "L": _out_matrix(p.L.T, exact), "F": _out_vector(linalg.upper_from_skew(p.F), exact),
           "orientation": p.orientation}
    if spec.expect:
        out["expect"] = dict(spec.expect)
    return out


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
