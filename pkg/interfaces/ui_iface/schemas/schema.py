from typing import Any, Dict

_COMPLEX = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_RANGE = {"type": "string", "pattern": r"^\s*[-+0-9.eE]+\s*:\s*[-+0-9.eE]+\s*:\s*[-+0-9.eE]+\s*$"}

def get_window_schema() -> Dict[str, Any]:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["a", "w"],
        "properties": {
            "a": {"type": "array", "minItems": 1, "items": _COMPLEX},
            "w": {"type": "array", "minItems": 1, "items": _COMPLEX},
            "name": {"type": "string"},
            "lattice": {"type": "object", "properties": {"alpha": {"type": "number", "exclusiveMinimum": 0}, "beta": {"type": "number", "exclusiveMinimum": 0}}},
            "meta": {"type": "object"}
        }
    }

def get_run_schema() -> Dict[str, Any]:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["window"],
        "properties": {
            "window": {"oneOf": [{"type": "string"}, {"type": "object"}]},
            "alpha": {"type": "number", "exclusiveMinimum": 0},
            "beta": {"type": "number", "exclusiveMinimum": 0},
            "alpha_range": _RANGE,
            "beta_range": _RANGE,
            "method": {"type": "string", "enum": ["auto", "herglotz", "irrational", "high-density", "near-critical", "critical", "oracle", "counterexample", "sis", "identities"]},
            "tolerances": {"type": "object", "properties": {"q_max": {"type": "integer", "minimum": 1}, "witness_rel": {"type": "number", "exclusiveMinimum": 0}, "oracle_sizes": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1}}},
            "seed": {"type": "integer"},
            "out": {"type": ["string", "null"]},
            "workers": {"type": "integer", "minimum": 1}
        }
    }
