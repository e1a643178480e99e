"""JSON system files: {"vars", "f", "g", "base", "plan"?, "expected"?}."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .expr import Expr, ParseError, SamplePlan, to_string
from .geometry import Chart, VectorField
from .structure import ControlSystem

__all__ = [
    "SchemaError",
    "SystemFile",
    "load_system_file",
    "system_to_dict",
    "dump_json",
    "PLAN_KEYS",
    "EXPECTED_KEYS",
]

PLAN_KEYS = ("half_width", "samples", "seed", "abs_tol", "rel_tol", "max_resamples")
EXPECTED_KEYS = ("epsilon", "kappa", "nu", "trivialisable", "family", "pipeline", "nu_claimed", "kappa_pde")


class SchemaError(ValueError):
    pass


@dataclass
class SystemFile:
    system: ControlSystem
    plan_overrides: dict = field(default_factory=dict)
    expected: dict | None = None

    def plan(self, **cli_overrides) -> SamplePlan:
        opts = dict(self.plan_overrides)
        opts.update({k: v for k, v in cli_overrides.items() if v is not None})
        return SamplePlan(self.system.base, **opts)


def _require(cond, message):
    if not cond:
        raise SchemaError(message)


def parse_system_dict(data: dict) -> SystemFile:
    _require(isinstance(data, dict), "system file must be a JSON object")
    for key in ("vars", "f", "g", "base"):
        _require(key in data, f"missing required key {key!r}")
    unknown = set(data) - {"vars", "f", "g", "base", "plan", "expected", "meta"}
    _require(not unknown, f"unknown keys: {sorted(unknown)}")
    names = data["vars"]
    _require(isinstance(names, list) and names and all(isinstance(n, str) for n in names),
             "'vars' must be a non-empty list of names")
    n = len(names)
    _require(isinstance(data["f"], list) and len(data["f"]) == n, f"'f' must list {n} expressions")
    _require(isinstance(data["g"], list) and data["g"], "'g' must be a non-empty list of vectors")
    for gi in data["g"]:
        _require(isinstance(gi, list) and len(gi) == n, f"every control field must list {n} expressions")
    _require(isinstance(data["base"], list) and len(data["base"]) == n, f"'base' must have {n} numbers")
    _require(all(isinstance(b, (int, float)) and not isinstance(b, bool) for b in data["base"]),
             "'base' entries must be numbers")
    plan = data.get("plan", {}) or {}
    _require(isinstance(plan, dict), "'plan' must be an object")
    bad = set(plan) - set(PLAN_KEYS)
    _require(not bad, f"unknown plan keys: {sorted(bad)}")
    expected = data.get("expected")
    if expected is not None:
        _require(isinstance(expected, dict), "'expected' must be an object")
        bad = set(expected) - set(EXPECTED_KEYS)
        _require(not bad, f"unknown expected keys: {sorted(bad)}")
        if expected.get("epsilon") is not None:
            _require(expected["epsilon"] in (-1, 1), "expected epsilon must be -1 or 1")
        for key in ("kappa", "nu"):
            if expected.get(key) is not None:
                _require(isinstance(expected[key], str), f"expected {key} must be an expression string")
    try:
        chart = Chart(tuple(names))
        f = VectorField.parse(chart, [str(s) for s in data["f"]])
        g = [VectorField.parse(chart, [str(s) for s in gi]) for gi in data["g"]]
        if expected:
            for key in ("kappa", "nu"):
                if expected.get(key) is not None:
                    chart.parse(expected[key])
    except ParseError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    sys = ControlSystem(chart, f, g, data["base"])
    try:
        SamplePlan(sys.base, **plan)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid plan: {exc}") from exc
    return SystemFile(sys, dict(plan), expected)


def load_system_file(path) -> SystemFile:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return parse_system_dict(data)


def _number(x):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def system_to_dict(sys: ControlSystem, plan: dict | None = None, expected: dict | None = None,
                   meta: dict | None = None) -> dict:
    out = {
        "vars": list(sys.names),
        "f": [to_string(c) for c in sys.f.components],
        "g": [[to_string(c) for c in gi.components] for gi in sys.g],
        "base": [_number(b) for b in sys.base],
    }
    if plan:
        out["plan"] = dict(plan)
    if expected is not None:
        out["expected"] = {k: (to_string(v) if isinstance(v, Expr) else v) for k, v in expected.items()
                           if k in EXPECTED_KEYS}
    if meta:
        out["meta"] = meta
    return out


def _clean(obj):
    """Replace non-finite floats by None so output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
