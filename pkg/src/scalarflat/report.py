"""JSON and CSV report emission with exact-value serialization.

Exact rationals are serialized as strings "p/q"; multiples of pi as
{"coeff": "p/q", "unit": "pi"} (or "pi^2").  Output files are written
atomically (temp file in the target directory, then rename), and JSON
keys are sorted so reports are byte-deterministic for a given run.
"""
from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from .units import PiMultiple


def rational_str(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}" if value.denominator != 1 else str(value.numerator)


def jsonify(obj):
    """Recursively convert report values to JSON-encodable structures."""
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, PiMultiple):
        return {"coeff": rational_str(obj.coeff), "unit": obj.unit}
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    if hasattr(obj, "value") and hasattr(obj, "name"):  # Enum
        return obj.value
    return str(obj)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload) -> None:
    _atomic_write(path, json.dumps(jsonify(payload), indent=2, sort_keys=True) + "\n")


def dumps(payload) -> str:
    return json.dumps(jsonify(payload), indent=2, sort_keys=True)


def write_grid_csv(path, sample) -> None:
    """Dump a grid sample as CSV with header x,y,t,V,v,w."""
    xs, ys, ts = sample.xs, sample.ys, sample.ts
    lines = ["x,y,t,V,v,w"]
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            for k, t in enumerate(ts):
                lines.append(
                    f"{x:.12g},{y:.12g},{t:.12g},"
                    f"{sample.V[i, j, k]:.12g},{sample.v[i, j, k]:.12g},{sample.w[i, j, k]:.12g}"
                )
    _atomic_write(path, "\n".join(lines) + "\n")
