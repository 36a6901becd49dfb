"""JSON problem/solution files (schema "waterladder/1")."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional

import jsonschema

from .errors import InvalidProblem
from .model import Problem, Sense, Solution
from .terms import CATALOG, PARAM_NAMES, term_from_dict
from .verify import KktReport

VERSION = "waterladder/1"

_TERM = {
    "type": "object",
    "required": ["kind", "params"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": sorted(CATALOG)},
        "params": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}

PROBLEM_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "waterladder problem",
    "type": "object",
    "required": ["version", "terms", "lower", "upper", "constraints"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "sense": {"enum": ["le", "ge"]},
        "terms": {"type": "array", "minItems": 1, "items": _TERM},
        "lower": {"type": "array", "items": {"anyOf": [{"type": "number"}, {"const": "-inf"}]}},
        "upper": {"type": "array", "items": {"anyOf": [{"type": "number"}, {"const": "+inf"}]}},
        "constraints": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["j", "rho"],
                "additionalProperties": False,
                "properties": {"j": {"type": "integer", "minimum": 1},
                               "rho": {"type": "number"}},
            },
        },
    },
}


def _num(v) -> float:
    if v == "-inf":
        return -math.inf
    if v == "+inf":
        return math.inf
    return float(v)


def encode_float(v: float):
    """JSON-safe float: infinities and NaN become strings."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return v


def problem_from_dict(data: dict) -> Problem:
    try:
        jsonschema.validate(data, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidProblem(f"schema violation at {where}: {exc.message}") from None
    for t in data["terms"]:
        extra = set(t["params"]) - {PARAM_NAMES[t["kind"]]}
        if extra:
            raise InvalidProblem(f"{t['kind']}: unexpected parameters {sorted(extra)}")
    terms = [term_from_dict(t) for t in data["terms"]]
    rho = {}
    for c in data["constraints"]:
        if c["j"] in rho:
            raise InvalidProblem(f"constraint index {c['j']} listed twice")
        rho[c["j"]] = float(c["rho"])
    return Problem(tuple(terms), [_num(v) for v in data["lower"]],
                   [_num(v) for v in data["upper"]], rho, Sense(data.get("sense", "le")))


def problem_to_dict(p: Problem) -> dict:
    return {
        "version": VERSION,
        "sense": p.sense.value,
        "terms": [t.to_dict() for t in p.terms],
        "lower": [encode_float(v) for v in p.lower],
        "upper": [encode_float(v) for v in p.upper],
        "constraints": [{"j": j, "rho": r} for j, r in p.rho.items()],
    }


def load_problem(path) -> Problem:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidProblem(f"{path}: not valid JSON ({exc})") from None
    return problem_from_dict(data)


def save_problem(p: Problem, path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(p), indent=2) + "\n")


def solution_to_dict(p: Problem, s: Solution, kkt: Optional[KktReport] = None) -> dict:
    out = {
        "x": [encode_float(v) for v in s.x],
        "sigma": [encode_float(v) for v in s.sigma],
        "nu": [encode_float(v) for v in s.nu],
        "kappa": [encode_float(v) for v in s.kappa],
        "trace": [{"mu": encode_float(b.mu), "k": b.k} for b in s.trace],
        "iterations": s.iterations,
        "objective": encode_float(p.objective(s.x)),
    }
    if kkt is not None:
        d = kkt.to_dict()
        passed = d.pop("pass")
        out["kkt"] = {"residuals": {k: encode_float(v) if isinstance(v, float) else v
                                    for k, v in d.items()},
                      "pass": passed}
    return out
