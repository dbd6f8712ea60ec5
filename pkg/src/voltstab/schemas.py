"""JSON Schemas for the documents written by the command-line tool."""

_NUM = {"type": ["number", "null"]}
_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_COMPLEX_OR_NULL = {"oneOf": [_COMPLEX, {"type": "null"}]}

SOLVE = {
    "type": "object",
    "required": ["command", "lambda", "converged", "iterations", "max_mismatch", "buses", "V", "I"],
    "additionalProperties": False,
    "properties": {
        "command": {"const": "solve"},
        "lambda": {"type": "number"},
        "converged": {"type": "boolean"},
        "iterations": {"type": "integer", "minimum": 0},
        "max_mismatch": _NUM,
        "buses": {"type": "array", "items": {"type": "integer"}},
        "V": {"type": "array", "items": _COMPLEX},
        "I": {"type": "array", "items": _COMPLEX},
    },
}

ENA = {
    "type": "object",
    "required": ["V_s", "Z_eq", "S_eq", "phi", "alpha1", "alpha2", "Delta"],
    "additionalProperties": False,
    "properties": {
        "V_s": _COMPLEX,
        "Z_eq": _COMPLEX,
        "S_eq": _COMPLEX,
        "phi": {"type": "number"},
        "alpha1": {"type": "number", "minimum": 0},
        "alpha2": {"type": "number", "minimum": 0},
        "Delta": {"type": "number"},
    },
}

INDICES = {
    "type": "object",
    "required": ["command", "lambda", "L", "min_margin", "buses"],
    "additionalProperties": False,
    "properties": {
        "command": {"const": "indices"},
        "lambda": {"type": "number"},
        "L": {"type": "number", "minimum": 0},
        "min_margin": {"type": "number"},
        "buses": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["bus", "V", "E", "z_eq_line", "L_term", "margin", "zl_mag", "ena"],
                "additionalProperties": False,
                "properties": {
                    "bus": {"type": "integer"},
                    "V": _COMPLEX,
                    "E": _COMPLEX,
                    "z_eq_line": _COMPLEX_OR_NULL,
                    "L_term": {"type": "number", "minimum": 0},
                    "margin": {"type": "number"},
                    "zl_mag": _NUM,
                    "ena": {"oneOf": [ENA, {"type": "null"}]},
                },
            },
        },
    },
}

NOSE = {
    "type": "object",
    "required": ["command", "bus", "lambda_nose", "lambda_delta_zero", "zl_at_nose", "zeq_mag", "match_reference"],
    "additionalProperties": False,
    "properties": {
        "command": {"const": "nose"},
        "bus": {"type": "integer"},
        "lambda_nose": {"type": "number"},
        "lambda_delta_zero": _NUM,
        "zl_at_nose": {"type": "number"},
        "zeq_mag": _NUM,
        "match_reference": _NUM,
    },
}

SWEEP = {
    "type": "object",
    "required": ["command", "columns", "rows"],
    "additionalProperties": False,
    "properties": {
        "command": {"const": "sweep"},
        "columns": {"type": "array", "items": {"type": "string"}},
        "rows": {"type": "array", "items": {"type": "array", "items": {"type": ["number", "null"]}}},
    },
}

COUNTEREXAMPLE = {
    "type": "object",
    "required": [
        "command",
        "lambda_nose",
        "lambda_star",
        "v_nose_mag",
        "lambda_delta_zero",
        "zl_at_nose",
        "zeq_mag",
        "match_reference",
        "delta_at_nose",
        "L_at_nose",
        "assertions",
        "verdict",
    ],
    "additionalProperties": False,
    "properties": {
        "command": {"const": "counterexample"},
        "lambda_nose": {"type": "number"},
        "lambda_star": {"type": "number"},
        "v_nose_mag": {"type": "number"},
        "lambda_delta_zero": _NUM,
        "zl_at_nose": {"type": "number"},
        "zeq_mag": {"type": "number"},
        "match_reference": {"type": "number"},
        "delta_at_nose": {"type": "number"},
        "L_at_nose": {"type": "number"},
        "assertions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed", "detail"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "detail": {"type": "string"},
                },
            },
        },
        "verdict": {"enum": ["pass", "fail"]},
    },
}

BY_COMMAND = {
    "solve": SOLVE,
    "indices": INDICES,
    "nose": NOSE,
    "sweep": SWEEP,
    "counterexample": COUNTEREXAMPLE,
}
