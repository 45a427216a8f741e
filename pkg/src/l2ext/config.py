"""Run configuration: JSON schema, defaults and canonical hashing."""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import jsonschema

from .errors import ConfigError

_NUM = {"type": "number"}
_COMPLEX = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}]}

_PROFILE = {
    "type": "object",
    "required": ["family"],
    "properties": {
        "family": {"enum": ["power", "scaled", "sampled", "regularized"]},
        "p": {"type": "number", "exclusiveMinimum": 0},
        "a": {"type": "number", "exclusiveMinimum": 0},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "knots": {"type": "array", "items": {"type": "array", "items": _NUM,
                                             "minItems": 2, "maxItems": 2}, "minItems": 2},
        "base": {"$ref": "#/$defs/profile"},
    },
    "additionalProperties": False,
}

_WEIGHT = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["radial", "parametric", "regularized"]},
        "profile": {"$ref": "#/$defs/profile"},
        "family": {"enum": ["zero", "quadratic", "exp_harmonic"]},
        "params": {"type": "object", "properties": {"alpha": {"type": "number", "minimum": 0},
                                                    "center": _COMPLEX, "b": _COMPLEX},
                   "additionalProperties": False},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "base": {"$ref": "#/$defs/weight"},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"profile": _PROFILE, "weight": _WEIGHT},
    "type": "object",
    "required": ["domain", "weight"],
    "properties": {
        "name": {"type": "string"},
        "domain": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["unit_disc", "disc", "conformal"]},
                "radius": {"type": "number", "exclusiveMinimum": 0},
                "coeffs": {"type": "array", "items": _COMPLEX, "minItems": 1},
            },
            "additionalProperties": False,
        },
        "weight": {"$ref": "#/$defs/weight"},
        "pipeline": {"enum": ["auto", "radial", "ma", "both", "pullback"]},
        "solver": {
            "type": "object",
            "properties": {
                "n_xy": {"type": "integer", "minimum": 16},
                "n_t": {"type": "integer", "minimum": 16},
                "t_min": {"type": "number", "maximum": -4},
                "C": {"type": "number", "exclusiveMaximum": 0},
                "stencil_dirs": {"type": "integer", "minimum": 2},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_sweeps": {"type": "integer", "minimum": 1},
                "method": {"enum": ["legendre", "sweep"]},
                "diagnose": {"type": "boolean"},
                "max_nodes": {"type": "integer", "minimum": 100},
                "refine_check": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "bergman": {
            "type": "object",
            "properties": {
                "N0": {"type": "integer", "minimum": 1},
                "N_max": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "quad": {
                    "type": "object",
                    "properties": {"scheme": {"enum": ["polar_tensor", "adaptive_radial"]},
                                   "n_r": {"type": "integer", "minimum": 1},
                                   "n_theta": {"type": "integer", "minimum": 0},
                                   "target_err": {"type": "number", "exclusiveMinimum": 0,
                                                  "exclusiveMaximum": 1}},
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {"Cs": {"type": "array", "items": {"type": "number"}}},
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {
                "formats": {"type": "array",
                            "items": {"enum": ["json", "csv", "plots", "field"]}},
                "path": {"type": "string"},
            },
            "additionalProperties": False,
        },
        "tol_chain": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}

DEFAULTS = {
    "name": "run",
    "pipeline": "auto",
    "solver": {"n_xy": 64, "n_t": 64, "t_min": -8.0, "C": -4.0, "stencil_dirs": 13,
               "tol": 1e-7, "max_sweeps": 20000, "method": "legendre", "diagnose": True,
               "max_nodes": 20000, "refine_check": True},
    "bergman": {"N0": 16, "N_max": 64, "tol": 1e-3,
                "quad": {"scheme": "adaptive_radial", "target_err": 1e-12}},
    "sweep": {"Cs": [-2.0, -4.0, -8.0]},
    "output": {"formats": ["json", "csv", "plots"], "path": "l2ext-out"},
    "tol_chain": 5e-3,
}


def validate(cfg):
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    return cfg


def with_defaults(cfg):
    """Validate and fill defaults (nested one level deep)."""
    validate(cfg)
    out = copy.deepcopy(DEFAULTS)
    for key, val in cfg.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key].update(copy.deepcopy(val))
        else:
            out[key] = copy.deepcopy(val)
    validate(out)
    return out


def load(path):
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return with_defaults(cfg)


def override(cfg, section, key, value):
    """Set ``cfg[section][key]`` (or ``cfg[key]`` if ``section`` is None) when given."""
    if value is None:
        return cfg
    if section is None:
        cfg[key] = value
    else:
        cfg.setdefault(section, {})[key] = value
    return cfg


def canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(cfg):
    return hashlib.sha256(canonical(cfg).encode()).hexdigest()
