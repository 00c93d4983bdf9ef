"""Ingestion of long-format vehicle records, garage pairing, trimming and summaries."""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy import special, stats

from .errors import DataError, DegenerateError
from .estimation import kendall_tau_xy, pseudo_observations
from .simulation import MODEL_YEAR_LABELS, model_year_bin

REQUIRED_COLUMNS = ("garage_id", "driver_id", "reported_mpg", "epa_mpg", "model_year", "fuel_type", "transmission")
OPTIONAL_COLUMNS = ("state",)
QQ_PERCENTILES = (5, 10, 25, 50, 75, 90, 95)


class FuelType(str, enum.Enum):
    DIESEL = "Diesel"
    GASOLINE = "Gasoline"
    HYBRID = "Hybrid"
    OTHER = "Other"


class Transmission(str, enum.Enum):
    MANUAL = "Manual"
    CVT = "CVT"
    AUTOMATIC = "Automatic"
    OTHER = "Other"


def _enum_value(cls, text: str):
    t = text.strip().lower()
    for member in cls:
        if member.value.lower() == t:
            return member
    return cls.OTHER


@dataclass(frozen=True)
class VehicleRecord:
    garage_id: str
    driver_id: str
    reported_mpg: float
    epa_mpg: float
    model_year: int
    fuel_type: FuelType
    transmission: Transmission
    state: Optional[str] = None
    line: int = 0

    @property
    def gap(self) -> float:
        return self.reported_mpg / self.epa_mpg


@dataclass(frozen=True)
class GaragePair:
    garage_id: str
    vehicle1: VehicleRecord
    vehicle2: VehicleRecord

    @property
    def gap1(self) -> float:
        return self.vehicle1.gap

    @property
    def gap2(self) -> float:
        return self.vehicle2.gap


@dataclass(frozen=True)
class Rejection:
    line: int
    reason: str


def _parse_row(row: dict, line: int) -> VehicleRecord:
    try:
        reported = float(row["reported_mpg"])
        epa = float(row["epa_mpg"])
        year = int(float(row["model_year"]))
    except (TypeError, ValueError) as exc:
        raise DataError(f"line {line}: cannot parse numeric field ({exc})") from None
    gid = (row.get("garage_id") or "").strip()
    did = (row.get("driver_id") or "").strip()
    if not gid or not did:
        raise DataError(f"line {line}: empty garage_id or driver_id")
    state = (row.get("state") or "").strip() or None
    return VehicleRecord(
        garage_id=gid,
        driver_id=did,
        reported_mpg=reported,
        epa_mpg=epa,
        model_year=year,
        fuel_type=_enum_value(FuelType, row.get("fuel_type") or ""),
        transmission=_enum_value(Transmission, row.get("transmission") or ""),
        state=state,
        line=line,
    )


def read_records(source: Union[str, os.PathLike, io.TextIOBase]) -> tuple[list[VehicleRecord], list[Rejection]]:
    """Parse the CSV; line numbers count the header as line 1."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_records(fh)
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise DataError("line 1: empty file")
    missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise DataError(f"line 1: missing columns {', '.join(missing)}")
    records, rejections = [], []
    seen = set()
    for i, row in enumerate(reader, start=2):
        if None in row or any(row.get(c) is None for c in REQUIRED_COLUMNS):
            raise DataError(f"line {i}: wrong number of fields")
        signature = tuple(row[c] for c in reader.fieldnames)
        if signature in seen:
            rejections.append(Rejection(i, "duplicate-row"))
            continue
        seen.add(signature)
        rec = _parse_row(row, i)
        if not (rec.reported_mpg > 0 and rec.epa_mpg > 0) or not (
            math.isfinite(rec.reported_mpg) and math.isfinite(rec.epa_mpg)
        ):
            rejections.append(Rejection(i, "non-positive-mpg"))
            continue
        records.append(rec)
    return records, rejections


def pair_records(records: Iterable[VehicleRecord]) -> tuple[list[GaragePair], list[Rejection]]:
    """Group by garage in order of first appearance; keep two-driver garages.

    Vehicle 1 is the older vehicle; equal model years fall back to driver_id.
    """
    groups: "OrderedDict[str, list[VehicleRecord]]" = OrderedDict()
    for r in records:
        groups.setdefault(r.garage_id, []).append(r)
    pairs, rejections = [], []
    for gid, rows in groups.items():
        if len(rows) != 2:
            rejections.extend(Rejection(r.line, "garage-size≠2") for r in rows)
            continue
        a, b = rows
        if a.driver_id == b.driver_id:
            rejections.extend(Rejection(r.line, "duplicate-driver") for r in rows)
            continue
        v1, v2 = sorted(rows, key=lambda r: (r.model_year, r.driver_id))
        pairs.append(GaragePair(gid, v1, v2))
    return pairs, rejections


def load_and_pair(path) -> tuple[list[GaragePair], list[Rejection]]:
    """Read, validate and pair a long-format file; returns pairs and the rejection log."""
    records, rej = read_records(path)
    pairs, rej2 = pair_records(records)
    return pairs, sorted(rej + rej2, key=lambda r: r.line)


def gaps(pairs: Sequence[GaragePair]) -> tuple[np.ndarray, np.ndarray]:
    g1 = np.fromiter((p.gap1 for p in pairs), dtype=float, count=len(pairs))
    g2 = np.fromiter((p.gap2 for p in pairs), dtype=float, count=len(pairs))
    return g1, g2


def model_year_labels(pairs: Sequence[GaragePair]) -> tuple[list[str], list[str]]:
    y1 = model_year_bin([p.vehicle1.model_year for p in pairs])
    y2 = model_year_bin([p.vehicle2.model_year for p in pairs])
    return [MODEL_YEAR_LABELS[i] for i in y1], [MODEL_YEAR_LABELS[i] for i in y2]


# ---------------------------------------------------------------- trimming


@dataclass(frozen=True)
class Thresholds:
    mean1: float
    sd1: float
    mean2: float
    sd2: float

    @classmethod
    def from_pairs(cls, pairs: Sequence[GaragePair]) -> "Thresholds":
        g1, g2 = gaps(pairs)
        if g1.size < 2:
            raise DegenerateError("need at least two garages to estimate thresholds")
        return cls(float(np.mean(g1)), float(np.std(g1, ddof=1)), float(np.mean(g2)), float(np.std(g2, ddof=1)))


@dataclass(frozen=True)
class TrimReport:
    n_before: int
    n_after: int
    outside_2sd: tuple[int, int]
    outside_3sd: tuple[int, int]
    removed_garages: int
    k: float
    thresholds: Thresholds

    def to_dict(self) -> dict:
        return {
            "n_before": self.n_before,
            "n_after": self.n_after,
            "outside_2sd": list(self.outside_2sd),
            "outside_3sd": list(self.outside_3sd),
            "removed_garages": self.removed_garages,
            "k": self.k,
            "thresholds": vars(self.thresholds),
        }


def _outside(g, mean, sd, k):
    return np.abs(g - mean) > k * sd


def trim_outliers(
    pairs: Sequence[GaragePair], k: float = 3.0, thresholds: Optional[Thresholds] = None
) -> tuple[list[GaragePair], TrimReport]:
    """Drop whole garages whose gap lies outside mean +/- k SD for either vehicle.

    Means and sample SDs come from the untrimmed input unless ``thresholds``
    are supplied. Counts outside 2 and 3 SD are always reported.
    """
    if not k > 0:
        raise DataError("k must be positive")
    th = thresholds or Thresholds.from_pairs(pairs)
    if th.sd1 == 0.0 or th.sd2 == 0.0:
        raise DegenerateError("gap standard deviation is zero")
    g1, g2 = gaps(pairs)
    drop = _outside(g1, th.mean1, th.sd1, k) | _outside(g2, th.mean2, th.sd2, k)
    kept = [p for p, d in zip(pairs, drop) if not d]
    count = lambda g, m, s, kk: int(np.sum(_outside(g, m, s, kk)))
    report = TrimReport(
        n_before=len(pairs),
        n_after=len(kept),
        outside_2sd=(count(g1, th.mean1, th.sd1, 2.0), count(g2, th.mean2, th.sd2, 2.0)),
        outside_3sd=(count(g1, th.mean1, th.sd1, 3.0), count(g2, th.mean2, th.sd2, 3.0)),
        removed_garages=len(pairs) - len(kept),
        k=float(k),
        thresholds=th,
    )
    return kept, report


# ---------------------------------------------------------------- summaries


def _moments(x) -> dict:
    x = np.asarray(x, dtype=float)
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return {"mean": float(np.mean(x)), "sd": sd, "min": float(np.min(x)), "max": float(np.max(x))}


def _shares(labels, categories) -> dict:
    labels = list(labels)
    n = len(labels)
    return {c: sum(1 for x in labels if x == c) / n for c in categories}


def descriptive_stats(pairs: Sequence[GaragePair]) -> dict:
    """Per-vehicle moments of reported MPG, EPA MPG and gap, plus categorical shares."""
    if not pairs:
        raise DataError("no garages")
    out = {"n": len(pairs)}
    y1, y2 = model_year_labels(pairs)
    for name, pick, years in (("vehicle1", lambda p: p.vehicle1, y1), ("vehicle2", lambda p: p.vehicle2, y2)):
        recs = [pick(p) for p in pairs]
        out[name] = {
            "reported_mpg": _moments([r.reported_mpg for r in recs]),
            "epa_mpg": _moments([r.epa_mpg for r in recs]),
            "gap": _moments([r.gap for r in recs]),
            "fuel_type": _shares((r.fuel_type.value for r in recs), [f.value for f in FuelType]),
            "transmission": _shares((r.transmission.value for r in recs), [t.value for t in Transmission]),
            "model_year": _shares(years, MODEL_YEAR_LABELS),
        }
    return out


@dataclass(frozen=True)
class QQData:
    normal_quantiles: np.ndarray
    sample_quantiles: np.ndarray
    markers: dict  # percentile -> (normal, sample)


def qq_data(values: Sequence[float]) -> QQData:
    """Normal Q-Q points with plotting positions (i - 0.5)/n, scaled by sample mean and SD."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n < 10:
        raise DataError(f"Q-Q data needs at least 10 values, got {n}")
    mean, sd = float(np.mean(x)), float(np.std(x, ddof=1))
    pp = (np.arange(1, n + 1) - 0.5) / n
    normal = mean + sd * special.ndtri(pp)
    markers = {}
    for p in QQ_PERCENTILES:
        markers[p] = (float(mean + sd * special.ndtri(p / 100.0)), float(np.quantile(x, p / 100.0)))
    return QQData(normal, x, markers)


def dependence_summary_xy(x, y) -> dict:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise DataError("need at least two pairs")
    if np.std(x) == 0.0 or np.std(y) == 0.0:
        raise DegenerateError("a gap column has zero variance")
    out = {"n": int(x.size), "pearson": float(stats.pearsonr(x, y)[0]), "kendall": kendall_tau_xy(x, y)}
    if x.size >= 10:
        s = pseudo_observations(x, y)
        out["pearson_pseudo"] = float(stats.pearsonr(s.u, s.v)[0])
    return out


def dependence_summary(pairs: Sequence[GaragePair]) -> dict:
    """Pearson on raw gaps, Kendall's tau, and Pearson on pseudo-observations."""
    return dependence_summary_xy(*gaps(pairs))
