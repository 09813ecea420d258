"""
canon-szego — Export Payload
Renders result records as JSON and CSV with 15 significant digits.
"""

import csv
import dataclasses
import io
import json
import math
import os
from fractions import Fraction
from typing import Optional

import numpy as np

DIGITS = ".15g"


def render_float(x: float):
    """Float rounded to 15 significant digits; non-finite values become strings."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(format(x, DIGITS))


def normalize(value):
    """Turn numbers, complex values, dataclasses and numpy data into plain JSON data."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: normalize(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [normalize(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating, Fraction)):
        return render_float(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": render_float(value.real), "im": render_float(value.imag)}
    return value


def _flatten(row: dict) -> dict:
    flat = {}
    for key, value in row.items():
        value = normalize(value)
        if isinstance(value, dict) and set(value) == {"re", "im"}:
            flat[f"{key}_re"] = value["re"]
            flat[f"{key}_im"] = value["im"]
        elif isinstance(value, (dict, list)):
            flat[key] = json.dumps(value, sort_keys=False)
        else:
            flat[key] = value
    return flat


def _write(text: str, path: Optional[str]) -> str:
    if path:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    return text


def export_json(data, path: Optional[str] = None) -> str:
    """Render data as indented JSON, writing it to path when given."""
    text = json.dumps(normalize(data), indent=2, ensure_ascii=False) + "\n"
    return _write(text, path)


def export_csv(rows: list[dict], path: Optional[str] = None) -> str:
    """
    Render a list of flat records as CSV.

    Complex fields split into <name>_re and <name>_im columns; nested values
    are stored as JSON strings. Column order follows the first appearance of
    each key.
    """
    flat = [_flatten(r) for r in rows]
    fieldnames = []
    for r in flat:
        for key in r:
            if key not in fieldnames:
                fieldnames.append(key)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(flat)
    return _write(buffer.getvalue(), path)


def export_all(data: dict, rows: list[dict], output_dir: str, stem: str) -> dict:
    """Write <stem>.json and <stem>.csv into output_dir and return their paths."""
    paths = {
        "json": os.path.join(output_dir, f"{stem}.json"),
        "csv": os.path.join(output_dir, f"{stem}.csv"),
    }
    export_json(data, paths["json"])
    export_csv(rows, paths["csv"])
    return paths
