"""CSV and JSON artifact writers.

Data files never carry timestamps so identical runs give identical bytes;
run metadata goes to a separate manifest.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def fmt(x: float) -> str:
    return f"{x:.15g}"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.asarray(rows, dtype=float).reshape(-1, len(header))
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(fmt(v) for v in r) + "\n")
    return path


def read_csv(path):
    """Return ``(header, rows)`` with rows as a float array."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in r] for r in reader]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def export_series(columns, path) -> Path:
    """``columns`` is a ``(header, 2-D array)`` pair as returned by the
    ``*_csv_columns`` helpers."""
    header, data = columns
    return write_csv(path, header, data)


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n")
    return path
