"""CSV and JSON helpers shared by the modules and the CLI.

Floats go out with 17 significant digits so that a round trip is lossless.
Column meanings are listed in ``data/csv_schema.txt``.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path, header: list[str], columns) -> None:
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    if len({c.size for c in cols}) > 1:
        raise ValueError("columns must have equal length")
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(FLOAT_FMT % x for x in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV; a non-numeric first line is taken as the header."""
    with open(path) as fh:
        rows = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    header: list[str] = []
    try:
        float(rows[0].split(",")[0])
    except ValueError:
        header = [h.strip() for h in rows[0].split(",")]
        rows = rows[1:]
    data = np.array([[float(x) for x in r.split(",")] for r in rows], dtype=float)
    return header, np.atleast_2d(data)


def read_matrix(path) -> np.ndarray:
    """Headerless CSV matrix (one grid row per line)."""
    _, data = read_csv(path)
    return data


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(record) -> str:
    return json.dumps(_clean(record), indent=2, sort_keys=True)


def write_json(path, record) -> None:
    _atomic_write(path, dumps(record) + "\n")
