"""Serialization of run artifacts.

Report tables go to CSV with six significant digits and to JSON at full
precision. Long-format vehicle records are data rather than reports, so
their floats are written with ``repr`` and re-read bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
import os
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

RECORD_COLUMNS = ("garage_id", "driver_id", "reported_mpg", "epa_mpg", "model_year", "fuel_type", "transmission", "state")


def fmt(x) -> str:
    """CSV cell text; floats at six significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".6g")
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])


def jsonable(obj):
    """Plain-Python copy of ``obj``; NaN and infinities become null."""
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "value"):
        return obj.value
    return str(obj)


def write_json(path, obj) -> None:
    text = json.dumps(jsonable(obj), indent=2, allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def write_records(rows: Iterable[Mapping], path, columns: Sequence[str] = RECORD_COLUMNS, extra: Optional[Mapping] = None) -> None:
    """Long-format rows; extra constant columns (such as the seed) are appended."""
    extra = dict(extra or {})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(columns) + list(extra))
        tail = [str(v) for v in extra.values()]
        for r in rows:
            cells = []
            for c in columns:
                x = r.get(c)
                cells.append("" if x is None else repr(x) if isinstance(x, float) else str(x))
            w.writerow(cells + tail)


def vehicle_rows(pairs) -> list[dict]:
    """Long-format rows of garage pairs, vehicle 1 first."""
    out = []
    for p in pairs:
        for r in (p.vehicle1, p.vehicle2):
            out.append({
                "garage_id": r.garage_id,
                "driver_id": r.driver_id,
                "reported_mpg": float(r.reported_mpg),
                "epa_mpg": float(r.epa_mpg),
                "model_year": int(r.model_year),
                "fuel_type": r.fuel_type.value,
                "transmission": r.transmission.value,
                "state": r.state,
            })
    return out


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
