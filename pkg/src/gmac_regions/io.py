"""CSV/JSON writers shared by the CLI.

CSV files start with ``#`` comment lines documenting the columns, use a dot
decimal separator regardless of locale, and print floats with 12
significant digits. JSON is written with sorted keys; infinities become the
strings ``"inf"``/``"-inf"``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


def fmt(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    # format() never consults the locale, so the separator is always a dot
    out = format(v, ".12g")
    return "0" if out == "-0" else out


def write_csv(path: str | Path, comments: Iterable[str], columns: Sequence[str],
              rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_polyline_csv(path: str | Path) -> np.ndarray:
    """Two numeric columns (``R1, R2``); comment lines and a header row are skipped."""
    pts = []
    with Path(path).open(encoding="utf-8") as fh:
        for row in csv.reader(line for line in fh if not line.lstrip().startswith("#")):
            if not row:
                continue
            try:
                pts.append((float(row[0]), float(row[1])))
            except ValueError:
                if pts:
                    raise
    return np.array(pts, dtype=float).reshape(-1, 2)


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return obj


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path
