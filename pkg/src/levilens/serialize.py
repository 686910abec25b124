"""JSON encoding helpers: complex numbers travel as ``[re, im]`` pairs."""
from __future__ import annotations

import json
from typing import Any

import numpy as np


def complex_pair(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def parse_complex(value) -> complex:
    """Accept a real number or an ``[re, im]`` pair."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex value must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"expected a number, got {value!r}")
    return complex(float(value))


def complex_list(values) -> list[list[float]]:
    return [complex_pair(v) for v in np.ravel(values)]


def parse_complex_list(values) -> np.ndarray:
    return np.array([parse_complex(v) for v in values], dtype=complex)


def complex_matrix(values) -> list[list[list[float]]]:
    return [[complex_pair(v) for v in row] for row in np.atleast_2d(values)]


def parse_complex_matrix(values, shape: tuple[int, int]) -> np.ndarray:
    """Rows of ``[re, im]`` pairs, or the same entries as one flat row-major list."""
    if not isinstance(values, list):
        raise ValueError("matrix entries must be a list")
    rows = values if values and isinstance(values[0], list) and values[0] and isinstance(values[0][0], list) else [values]
    flat = [v for row in rows for v in row]
    if len(flat) != shape[0] * shape[1]:
        raise ValueError(f"expected {shape[0]}x{shape[1]} entries, got {len(flat)}")
    return parse_complex_list(flat).reshape(shape)


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and complex numbers."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(obj.tolist())
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_pair(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed separators."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=True)
