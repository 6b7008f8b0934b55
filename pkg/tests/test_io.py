"""Deterministic formatting and RFC 4180 behavior of the output writers."""
import csv
import json
import math

import numpy as np

from coldcc import io


def test_float_formatting_ten_significant_digits():
    assert io.format_float(math.pi) == "3.141592654e+00"
    assert io.format_float(-1.0e-6) == "-1.000000000e-06"
    assert io.format_float(float("nan")) == "nan"
    assert io.format_cell(True) == "true"
    assert io.format_cell(np.int64(7)) == "7"
    assert io.format_cell("v0n0j1l0") == "v0n0j1l0"


def test_jsonable_converts_numpy_and_nan():
    payload = {
        "arr": np.array([1.0, 2.5]),
        "n": np.int32(3),
        "flag": np.bool_(True),
        "bad": float("nan"),
        "nest": [{"x": np.float64(0.1)}],
    }
    out = io.jsonable(payload)
    assert out["arr"] == [1.0, 2.5]
    assert out["n"] == 3 and isinstance(out["n"], int)
    assert out["flag"] is True
    assert out["bad"] is None
    json.dumps(out, allow_nan=False)


def test_csv_rfc4180_quoting_and_line_endings(tmp_path):
    path = tmp_path / "t.csv"
    io.write_csv(path, ["a", "b"], [["plain", 'with "quote", comma'],
                                    [1.5, "two\nlines"]])
    raw = path.read_bytes()
    assert b"\r\n" in raw
    assert b'"with ""quote"", comma"' in raw
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[1][1] == 'with "quote", comma'
    assert rows[2] == ["1.500000000e+00", "two\nlines"]


def test_json_output_is_key_sorted_and_reproducible(tmp_path):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    io.write_json(p1, {"z": 1.0, "a": [3, 2], "m": {"k": 0.1}})
    io.write_json(p2, {"m": {"k": 0.1}, "a": [3, 2], "z": 1.0})
    assert p1.read_bytes() == p2.read_bytes()
    assert json.loads(p1.read_text())["m"]["k"] == 0.1
