"""Sampling from fitted copulas, normal margins, prediction and cross-tab reports.

Randomness comes from ``numpy.random.SeedSequence``. A root seed is expanded
to independent streams keyed by ``(stage, block)``: each stage of a run
(sampling, lambda simulation, synthetic data) owns a stage number, and
draws are produced in fixed-size blocks, each from its own stream. Output
therefore depends only on the root seed and the stage, never on how many
blocks are evaluated at once or in which order the stages run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import special

from .copula import clamp, h_inverse, is_independence
from .errors import DataError, DomainError
from .families import CopulaFamily, CopulaParams, Kind, UnitPair, check_params

BLOCK = 1 << 16

# stage numbers for seed streams
STAGE_SAMPLE = 1
STAGE_LAMBDA = 2
STAGE_GENERATE = 3
STAGE_PAIRING = 4
STAGE_FIXTURE = 5


def stream(seed: int, stage: int, block: int = 0) -> np.random.Generator:
    """Independent generator for one ``(stage, block)`` cell of a root seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stage), int(block)))
    return np.random.Generator(np.random.PCG64(ss))


def _sample_block(family, params, m, rng):
    kind = family.kind
    if kind in (Kind.GAUSSIAN, Kind.STUDENT_T):
        z = rng.standard_normal((2, m))
        rho = params.theta
        x = z[0]
        y = rho * z[0] + math.sqrt(1.0 - rho * rho) * z[1]
        if kind is Kind.GAUSSIAN:
            return special.ndtr(x), special.ndtr(y)
        nu = params.nu
        w = np.sqrt(rng.chisquare(nu, m) / nu)
        return special.stdtr(nu, x / w), special.stdtr(nu, y / w)
    uq = rng.random((2, m))
    u, q = uq[0], uq[1]
    if is_independence(family, params):
        return u, q
    return u, h_inverse(family, params, u, q)


def sample_pairs(
    family: CopulaFamily, params: CopulaParams, n: int, seed: int, stage: int = STAGE_SAMPLE
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` pairs (u, v) from the copula.

    Non-elliptical families use conditional inversion v = h^-1(u, q) with
    independent uniforms u, q; elliptical families use the latent normal or
    t construction. Both coordinates are clamped to the open unit square.
    """
    check_params(family, params)
    n = int(n)
    if n < 1:
        raise DomainError("n must be at least 1")
    us, vs = [], []
    for b in range((n + BLOCK - 1) // BLOCK):
        m = min(BLOCK, n - b * BLOCK)
        u, v = _sample_block(family, params, m, stream(seed, stage, b))
        us.append(u)
        vs.append(v)
    return clamp(np.concatenate(us)), clamp(np.concatenate(vs))


def as_unit_pairs(u, v) -> list[UnitPair]:
    return [UnitPair(float(a), float(b)) for a, b in zip(u, v)]


# ---------------------------------------------------------------- margins


@dataclass(frozen=True)
class MarginModel:
    mean1: float
    sd1: float
    mean2: float
    sd2: float

    def __post_init__(self):
        if not (self.sd1 > 0 and self.sd2 > 0):
            raise DomainError("margin standard deviations must be positive")

    @classmethod
    def from_gaps(cls, gap1, gap2) -> "MarginModel":
        """Sample means and sample (n - 1) standard deviations."""
        g1 = np.asarray(gap1, dtype=float)
        g2 = np.asarray(gap2, dtype=float)
        return cls(float(g1.mean()), float(g1.std(ddof=1)), float(g2.mean()), float(g2.std(ddof=1)))


def apply_margins(u, v, m: MarginModel) -> tuple[np.ndarray, np.ndarray]:
    """gap = mean + sd * Phi^-1(unit value), per coordinate."""
    u = clamp(u)
    v = clamp(v)
    return m.mean1 + m.sd1 * special.ndtri(u), m.mean2 + m.sd2 * special.ndtri(v)


# ---------------------------------------------------------------- cross tabs

CATEGORY_LABELS = ("Cat1", "Cat2", "Cat3", "Cat4")
CATEGORY_DESCRIPTIONS = ("gap >= 1.1", "1.0 <= gap < 1.1", "0.9 <= gap < 1.0", "gap < 0.9")


def gap_category(gap) -> np.ndarray:
    """Zero-based category index: 0 for gap >= 1.1 down to 3 for gap < 0.9."""
    g = np.asarray(gap, dtype=float)
    return np.select([g >= 1.1, g >= 1.0, g >= 0.9], [0, 1, 2], default=3)


@dataclass(frozen=True)
class CrossTab:
    counts: np.ndarray
    row_pct: np.ndarray
    col_pct: np.ndarray
    row_totals: np.ndarray
    col_totals: np.ndarray
    grand: int

    def cell(self, i: int, j: int) -> tuple[int, float, float]:
        """(count, row %, column %) with 1-based category indices."""
        return int(self.counts[i - 1, j - 1]), float(self.row_pct[i - 1, j - 1]), float(self.col_pct[i - 1, j - 1])

    def to_dict(self) -> dict:
        return {
            "categories": dict(zip(CATEGORY_LABELS, CATEGORY_DESCRIPTIONS)),
            "counts": self.counts.tolist(),
            "row_pct": self.row_pct.tolist(),
            "col_pct": self.col_pct.tolist(),
            "row_totals": self.row_totals.tolist(),
            "col_totals": self.col_totals.tolist(),
            "grand": self.grand,
        }


def _pct(num, den):
    den = np.asarray(den, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = 100.0 * num / den
    # empty rows or columns carry no percentages
    return np.where(den > 0, out, 0.0)


def crosstab(gap1, gap2) -> CrossTab:
    """4 x 4 table of vehicle-1 category (rows) by vehicle-2 category (columns)."""
    c1 = gap_category(gap1).reshape(-1)
    c2 = gap_category(gap2).reshape(-1)
    if c1.size != c2.size:
        raise DataError("gap columns differ in length")
    counts = np.zeros((4, 4), dtype=np.int64)
    np.add.at(counts, (c1, c2), 1)
    rt = counts.sum(axis=1)
    ct = counts.sum(axis=0)
    return CrossTab(
        counts=counts,
        row_pct=_pct(counts, rt[:, None]),
        col_pct=_pct(counts, ct[None, :]),
        row_totals=rt,
        col_totals=ct,
        grand=int(counts.sum()),
    )


# ---------------------------------------------------------------- prediction


@dataclass(frozen=True)
class Summary:
    mean: float
    median: float
    q1: float
    q3: float
    min: float
    max: float

    @classmethod
    def of(cls, x) -> "Summary":
        x = np.asarray(x, dtype=float)
        q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75])
        return cls(float(x.mean()), float(med), float(q1), float(q3), float(x.min()), float(x.max()))


@dataclass(frozen=True)
class VehicleComparison:
    n: int
    observed: Summary
    simulated: Summary
    mad: float
    rmse: float


@dataclass(frozen=True)
class PredictionReport:
    """Per stratum, one comparison for each vehicle."""

    strata: dict
    pairing: str

    def rows(self) -> list[dict]:
        out = []
        for name, (c1, c2) in self.strata.items():
            for stat in ("mean", "median", "q1", "q3", "min", "max"):
                o1, s1 = getattr(c1.observed, stat), getattr(c1.simulated, stat)
                o2, s2 = getattr(c2.observed, stat), getattr(c2.simulated, stat)
                out.append({
                    "stratum": name, "statistic": stat,
                    "v1_observed": o1, "v1_simulated": s1, "v1_absdiff": abs(o1 - s1),
                    "v2_observed": o2, "v2_simulated": s2, "v2_absdiff": abs(o2 - s2),
                })
            for stat in ("mad", "rmse"):
                out.append({
                    "stratum": name, "statistic": stat,
                    "v1_observed": None, "v1_simulated": getattr(c1, stat), "v1_absdiff": None,
                    "v2_observed": None, "v2_simulated": getattr(c2, stat), "v2_absdiff": None,
                })
        return out


def _compare(obs, sim, pairing: str, rng) -> VehicleComparison:
    obs = np.asarray(obs, dtype=float)
    sim = np.asarray(sim, dtype=float)
    if obs.size == 0:
        raise DataError("empty stratum")
    if obs.size != sim.size:
        raise DataError("observed and simulated strata differ in size")
    if pairing == "sorted":
        a, b = np.sort(obs), np.sort(sim)
    elif pairing == "random":
        a, b = obs, sim[rng.permutation(sim.size)]
    else:
        raise DomainError(f"unknown pairing {pairing!r}")
    d = a - b
    return VehicleComparison(
        n=int(obs.size),
        observed=Summary.of(obs),
        simulated=Summary.of(sim),
        mad=float(np.mean(np.abs(d))),
        rmse=float(np.sqrt(np.mean(d * d))),
    )


def prediction_report(
    observed: tuple[Sequence[float], Sequence[float]],
    simulated: tuple[Sequence[float], Sequence[float]],
    strata: Optional[tuple[Sequence[str], Sequence[str]]] = None,
    pairing: str = "sorted",
    seed: int = 0,
    order: Optional[Iterable[str]] = None,
) -> PredictionReport:
    """Observed vs simulated gap summaries, overall and per stratum.

    ``strata`` gives one label per row for each vehicle (vehicles are
    stratified by their own model year); simulated row i shares the labels of
    observed row i. ``pairing`` selects sorted (quantile-matched) or random
    matching for MAD and RMSE.
    """
    o1, o2 = (np.asarray(x, dtype=float) for x in observed)
    s1, s2 = (np.asarray(x, dtype=float) for x in simulated)
    if not (o1.size == o2.size == s1.size == s2.size):
        raise DataError("observed and simulated samples must have equal size")
    rng = stream(seed, STAGE_PAIRING)
    out = {"Overall": (_compare(o1, s1, pairing, rng), _compare(o2, s2, pairing, rng))}
    if strata is not None:
        l1, l2 = (np.asarray(x) for x in strata)
        names = list(order) if order is not None else sorted(set(l1.tolist()) | set(l2.tolist()))
        for name in names:
            m1, m2 = l1 == name, l2 == name
            if not m1.any() or not m2.any():
                continue
            out[str(name)] = (
                _compare(o1[m1], s1[m1], pairing, rng),
                _compare(o2[m2], s2[m2], pairing, rng),
            )
    return PredictionReport(out, pairing)


# ---------------------------------------------------------------- synthetic data

MODEL_YEAR_BINS = ((1984, 1988), (1989, 1993), (1994, 1998), (1999, 2003), (2004, 2008), (2009, 2014))
MODEL_YEAR_LABELS = tuple(f"{a}-{b}" for a, b in MODEL_YEAR_BINS)
YEAR_SHARES = (
    (0.05, 0.11, 0.22, 0.32, 0.25, 0.05),
    (0.004, 0.02, 0.08, 0.22, 0.47, 0.21),
)
FUEL_TYPES = ("Diesel", "Gasoline", "Hybrid", "Other")
FUEL_SHARES = ((0.02, 0.94, 0.04, 0.0), (0.03, 0.89, 0.08, 0.0))
TRANSMISSIONS = ("Manual", "CVT", "Automatic", "Other")
TRANSMISSION_SHARES = ((0.26, 0.04, 0.69, 0.01), (0.20, 0.10, 0.69, 0.01))
EPA_MEDIANS = (24.3, 26.4)
EPA_SIGMA = 0.3
EPA_RANGE = (10.0, 65.0)
STATES = ("CA", "TX", "FL", "NY", "PA", "IL", "OH", "MI", "WA", "VA")

REFERENCE_MARGINS = MarginModel(1.017, 0.17, 0.9986, 0.16)


def model_year_bin(year) -> np.ndarray:
    """Zero-based model-year category; years outside 1984-2014 fall in the end bins."""
    y = np.asarray(year)
    edges = np.array([b for _, b in MODEL_YEAR_BINS[:-1]])
    return np.searchsorted(edges, y, side="left")


def _norm(p):
    p = np.asarray(p, dtype=float)
    return p / p.sum()


def _draw_years(rng, shares, m):
    bins = rng.choice(len(MODEL_YEAR_BINS), size=m, p=_norm(shares))
    lo = np.array([a for a, _ in MODEL_YEAR_BINS])[bins]
    hi = np.array([b for _, b in MODEL_YEAR_BINS])[bins]
    return lo + np.floor(rng.random(m) * (hi - lo + 1)).astype(int)


def synthetic_records(
    gap1, gap2, rng: np.random.Generator, id_offset: int = 0
) -> list[dict]:
    """Long-format rows for given gap pairs with plausible covariates."""
    gap1 = np.asarray(gap1, dtype=float)
    gap2 = np.asarray(gap2, dtype=float)
    m = gap1.size
    ya = _draw_years(rng, YEAR_SHARES[0], m)
    yb = _draw_years(rng, YEAR_SHARES[1], m)
    y1, y2 = np.minimum(ya, yb), np.maximum(ya, yb)
    rows = []
    cols = []
    for k, (years, gaps) in enumerate(((y1, gap1), (y2, gap2))):
        epa = np.exp(np.log(EPA_MEDIANS[k]) + EPA_SIGMA * rng.standard_normal(m))
        epa = np.clip(np.round(epa), *EPA_RANGE)
        fuel = rng.choice(len(FUEL_TYPES), size=m, p=_norm(FUEL_SHARES[k]))
        trans = rng.choice(len(TRANSMISSIONS), size=m, p=_norm(TRANSMISSION_SHARES[k]))
        cols.append((years, gaps, epa, fuel, trans))
    state = rng.choice(len(STATES), size=m)
    for i in range(m):
        gid = f"G{id_offset + i + 1:06d}"
        for k in range(2):
            years, gaps, epa, fuel, trans = cols[k]
            rows.append({
                "garage_id": gid,
                "driver_id": f"D{2 * (id_offset + i) + k + 1:07d}",
                "reported_mpg": float(gaps[i] * epa[i]),
                "epa_mpg": float(epa[i]),
                "model_year": int(years[i]),
                "fuel_type": FUEL_TYPES[fuel[i]],
                "transmission": TRANSMISSIONS[trans[i]],
                "state": STATES[state[i]],
            })
    return rows


def generate_synthetic_dataset(
    n_garages: int,
    seed: int,
    margins: MarginModel = REFERENCE_MARGINS,
    family: CopulaFamily = CopulaFamily(Kind.STUDENT_T),
    params: CopulaParams = CopulaParams(0.427, nu=5.325),
) -> list[dict]:
    """2 * n_garages long-format rows whose gaps follow the copula and margins.

    Vehicle 1 is the older vehicle; reported_mpg = gap * epa_mpg.
    """
    n_garages = int(n_garages)
    if n_garages < 1:
        raise DomainError("n_garages must be at least 1")
    u, v = sample_pairs(family, params, n_garages, seed, stage=STAGE_GENERATE)
    g1, g2 = apply_margins(u, v, margins)
    # gaps are ratios; a normal margin leaves a negligible mass below zero
    g1 = np.maximum(g1, 0.01)
    g2 = np.maximum(g2, 0.01)
    return synthetic_records(g1, g2, stream(seed, STAGE_GENERATE, 1 << 20))
