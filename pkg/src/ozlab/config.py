"""Run configuration: schema checks and defaults."""

from __future__ import annotations

import copy
import json

import jsonschema

from ozlab.errors import UsageError

DEFAULTS = {
    "periodic": True,
    "resolution": 64,
    "delta": 0.1,
    "K": 3.0,
    "high_surcharge_fraction": 0.5,
    "burn_in": 200,
    "estimator": "cluster",
}

_NUM = {"type": "number"}

SCHEMA = {
    "type": "object",
    "required": ["dim", "couplings", "beta", "extents"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "beta": {"type": "number", "minimum": 0},
        "beta_max": {"type": "number", "exclusiveMinimum": 0},
        "couplings": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["v", "J"],
                "properties": {"v": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                               "J": {"type": "number", "minimum": 0}},
                "additionalProperties": False,
            },
        },
        "extents": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "periodic": {"type": "boolean"},
        "resolution": {"type": "integer", "minimum": 4},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "K": {"type": "number", "exclusiveMinimum": 0},
        "high_surcharge_fraction": {"type": "number", "exclusiveMinimum": 0},
        "burn_in": {"type": "integer", "minimum": 0},
        "estimator": {"enum": ["plain", "cluster"]},
        "xi_target": _NUM,
    },
    "additionalProperties": False,
}


def _key_path(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def validate_config(text: str | dict) -> dict:
    """Schema-check a model config and fill defaults.

    Couplings may list ``v`` and ``-v`` or only one of them; listing just one
    is shorthand for both.  Asymmetric values are rejected.
    """
    if isinstance(text, dict):
        data = copy.deepcopy(text)
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"config key {_key_path(exc)!s}: {exc.message}") from exc
    d = data["dim"]
    if len(data["extents"]) != d:
        raise UsageError(f"config key extents: expected {d} entries, got {len(data['extents'])}")
    coup: dict[tuple[int, ...], float] = {}
    for i, c in enumerate(data["couplings"]):
        v = tuple(c["v"])
        if len(v) != d:
            raise UsageError(f"config key couplings.{i}.v: expected {d} components")
        if not any(v):
            raise UsageError(f"config key couplings.{i}.v: J_0 must not be set")
        if v in coup and coup[v] != c["J"]:
            raise UsageError(f"config key couplings.{i}: duplicate vector {list(v)}")
        coup[v] = float(c["J"])
    for v, J in list(coup.items()):
        mv = tuple(-x for x in v)
        if mv in coup and coup[mv] != J:
            raise UsageError(f"config key couplings: J{list(v)}={J} but J{list(mv)}={coup[mv]}; "
                             "couplings must be symmetric, J_v = J_-v")
        coup.setdefault(mv, J)
    if not any(J > 0 for J in coup.values()):
        raise UsageError("config key couplings: at least one J_v must be positive")
    out = {**DEFAULTS, **data}
    out["couplings"] = [{"v": list(v), "J": J} for v, J in sorted(coup.items())]
    return out


def model_from_config(cfg: dict):
    from ozlab.ising.model import IsingModel, SpinLattice

    coup = {tuple(c["v"]): c["J"] for c in cfg["couplings"]}
    model = IsingModel(cfg["dim"], coup, cfg["beta"], cfg.get("beta_max"))
    lattice = SpinLattice(tuple(cfg["extents"]), cfg["periodic"])
    return model, lattice
