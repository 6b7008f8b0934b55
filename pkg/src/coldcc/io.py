"""Deterministic CSV and JSON writers for the command-line outputs.

Every float is rendered in scientific notation with 10 significant digits
before it reaches a file, so identical runs produce byte-identical output
and 1%-level regressions stay visible.  CSV follows RFC 4180 (CRLF line
endings, minimal quoting); the JSON mirror carries the same rounded values
as numbers, with NaN mapped to null to stay standard JSON.
"""
import csv
import json
import math
import numbers
from pathlib import Path

import numpy as np


def format_float(x: float) -> str:
    """Scientific notation, 10 significant digits."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.9e}"


def format_cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, numbers.Integral):
        return str(int(x))
    if isinstance(x, numbers.Real):
        return format_float(x)
    return str(x)


def _round_trip(x: float):
    x = float(x)
    if math.isnan(x):
        return None
    return float(format_float(x))


def jsonable(obj):
    """Recursive conversion to plain JSON types at fixed float precision."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, numbers.Integral):
        return int(obj)
    if isinstance(obj, numbers.Real):
        return _round_trip(obj)
    return obj


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow([str(h) for h in header])
        for row in rows:
            writer.writerow([format_cell(x) for x in row])


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2,
                      allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
