"""Model-file loading and validation.

A model file bundles the group, the constraint structure, the potential, and
optionally a sofic-builder block:

    {
      "group": {"kind": "Zd", "d": 1},
      "alphabet": 2,
      "relations": {"e1": [[true, true], [true, false]]},
      "vertex_log_weights": [0.0, 0.6931471805599453],
      "edge_log_weights": {"e1": [[0.0, 0.0], [0.0, 0.0]]},
      "sofic": {"builder": "torus", "params": {"d": 1, "m": 64}, "seed": 0}
    }

Relations are keyed by generator name (e1..ed for Z^d, a/b/c.. for free
groups); omitted edge_log_weights default to zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from jsonschema import Draft202012Validator

from .constraints import ConstraintStructure, Potential
from .errors import SchemaError
from .groups import GroupSpec, free, zd

MODEL_SCHEMA = {
    "type": "object",
    "required": ["group", "alphabet", "relations", "vertex_log_weights"],
    "properties": {
        "group": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["Zd", "Free"]},
                "d": {"type": "integer", "minimum": 1},
                "k": {"type": "integer", "minimum": 1},
            },
        },
        "alphabet": {"type": "integer", "minimum": 1},
        "relations": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "boolean"}},
            },
        },
        "vertex_log_weights": {"type": "array", "items": {"type": "number"}},
        "edge_log_weights": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "number"}},
            },
        },
        "sofic": {
            "type": "object",
            "required": ["builder"],
            "properties": {
                "builder": {"enum": ["torus", "folner", "random_perm"]},
                "params": {"type": "object"},
                "seed": {"type": "integer"},
            },
        },
    },
}


@dataclass
class Model:
    spec: GroupSpec
    structure: ConstraintStructure
    potential: Potential
    sofic: dict | None
    raw: dict


def parse_model(data: dict) -> Model:
    errors = sorted(Draft202012Validator(MODEL_SCHEMA).iter_errors(data), key=str)
    if errors:
        raise SchemaError("; ".join(e.message for e in errors[:3]))
    g = data["group"]
    if g["kind"] == "Zd":
        if "d" not in g:
            raise SchemaError("Zd group needs field d")
        spec = zd(g["d"])
    else:
        if "k" not in g:
            raise SchemaError("Free group needs field k")
        spec = free(g["k"])
    a = data["alphabet"]
    names = spec.generator_names()
    allowed = np.empty((spec.n_generators, a, a), dtype=bool)
    for i, name in enumerate(names):
        if name not in data["relations"]:
            raise SchemaError(f"relations missing generator {name!r}")
        mat = np.asarray(data["relations"][name], dtype=bool)
        if mat.shape != (a, a):
            raise SchemaError(f"relation {name!r} must be {a}x{a}")
        allowed[i] = mat
    h = np.asarray(data["vertex_log_weights"], dtype=float)
    if h.shape != (a,):
        raise SchemaError("vertex_log_weights length must equal alphabet")
    J = np.zeros((spec.n_generators, a, a))
    for i, name in enumerate(names):
        if name in data.get("edge_log_weights", {}):
            mat = np.asarray(data["edge_log_weights"][name], dtype=float)
            if mat.shape != (a, a):
                raise SchemaError(f"edge_log_weights {name!r} must be {a}x{a}")
            J[i] = mat
    try:
        structure = ConstraintStructure(a, allowed)
        potential = Potential(h, J)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    return Model(spec, structure, potential, data.get("sofic"), data)


def load_model(path: str) -> Model:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read model file: {exc}") from exc
    return parse_model(data)


def hardcore_model_dict(kind: str, rank: int, lam: float) -> dict:
    """Model-file dict for the hardcore model with activity lam."""
    spec = zd(rank) if kind == "Zd" else free(rank)
    names = spec.generator_names()
    rel = [[True, True], [True, False]]
    return {
        "group": {"kind": kind, ("d" if kind == "Zd" else "k"): rank},
        "alphabet": 2,
        "relations": {n: rel for n in names},
        "vertex_log_weights": [0.0, math.log(lam)],
    }


GRAPH_SCHEMA = {
    "type": "object",
    "required": ["n", "edges"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "edges": {
            "type": "array",
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "integer"}},
        },
        "lambda": {"type": ["number", "array"]},
        "pins": {
            "type": "object",
            "properties": {
                "occupied": {"type": "array", "items": {"type": "integer"}},
                "empty": {"type": "array", "items": {"type": "integer"}},
            },
        },
    },
}


def load_graph(path: str):
    """Finite graph file for saw-marginal: adjacency, activity, pins."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read graph file: {exc}") from exc
    errors = sorted(Draft202012Validator(GRAPH_SCHEMA).iter_errors(data), key=str)
    if errors:
        raise SchemaError("; ".join(e.message for e in errors[:3]))
    n = data["n"]
    adj = [set() for _ in range(n)]
    for u, v in data["edges"]:
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise SchemaError(f"bad edge [{u}, {v}]")
        adj[u].add(v)
        adj[v].add(u)
    lam = data.get("lambda", 1.0)
    pins = {}
    for v in data.get("pins", {}).get("occupied", []):
        pins[int(v)] = 1
    for v in data.get("pins", {}).get("empty", []):
        pins[int(v)] = 0
    return [sorted(s) for s in adj], lam, pins
