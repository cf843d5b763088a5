"""CSV and JSON writers (CSV floats use 17 significant digits)."""
from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np


def fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, columns):
    """Write equal-length ``columns`` under ``header``; returns the path."""
    path = Path(path)
    cols = [list(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError("header and column count differ")
    n = {len(c) for c in cols}
    if len(n) > 1:
        raise ValueError("columns have different lengths")
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Header and ``{name: column}`` of a file written by :func:`write_csv`.

    Columns that parse as floats come back as arrays, others as lists of str.
    """
    text = Path(path).read_text().splitlines()
    header = text[0].split(",")
    rows = [line.split(",") for line in text[1:] if line]
    cols = {}
    for i, h in enumerate(header):
        raw = [r[i] for r in rows]
        try:
            cols[h] = np.array([float(v) for v in raw])
        except ValueError:
            cols[h] = raw
    return header, cols


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=False) + "\n")
    return path
