"""Deterministic builder for the bundled two-vehicle garage fixture.

The fixture has 7244 garages. Full-sample gap means and sample SDs are
fixed at (1.02, 0.20) and (1.00, 0.20). Relative to those thresholds,
vehicle 1 has 263 gaps beyond 2 SD and 71 beyond 3 SD, and vehicle 2 has
222 and 57. Ten garages are outliers on both vehicles, so trimming at
3 SD removes 118 garages. The 7126 retained garages reproduce a fixed 4 x 4
gap-category table exactly.

Construction:
  1. Candidate pairs are drawn from a Student-t copula with normal margins.
     Each category cell takes its quota from candidates in that cell,
     taking first the candidates that fall between 2 and 3 SD until the
     per-vehicle zone quotas are met.
  2. Removed garages get outlier values beyond 3 SD. A non-outlier
     coordinate of a removed garage lies within 1.5 SD.
  3. Two free outliers per vehicle are solved from the moment equations so
     the full sample mean and SD hit their targets exactly.

Every retained value keeps at least 0.01 SD from the 2 and 3 SD cut
points and stays 1e-6 from the category boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .artifacts import RECORD_COLUMNS as COLUMNS, write_records
from .families import CopulaFamily, CopulaParams, Kind
from .simulation import STAGE_FIXTURE, MarginModel, apply_margins, gap_category, sample_pairs, stream, synthetic_records

N_GARAGES = 7244
TARGET_COUNTS = np.array(
    [
        [881, 483, 451, 271],
        [403, 410, 450, 313],
        [262, 361, 617, 539],
        [203, 207, 425, 850],
    ]
)
TARGET_MEAN = (1.02, 1.0)
TARGET_SD = (0.20, 0.20)
OUTLIERS_3SD = (71, 57)
OUTSIDE_2SD = (263, 222)
BOTH_OUTLIERS = 10
EXTREMES = ((0.14, 4.18), (0.18, 4.58))
KEPT_MARGINS = MarginModel(1.021, 0.17, 1.006, 0.16)
FIXTURE_SEED = 20190
FIXTURE_FILE = "garages_fixture.csv"

_Z_MARGIN = 0.01
_BOUNDARY_EPS = 1e-6


def _z(g, k):
    return (g - TARGET_MEAN[k]) / TARGET_SD[k]


def _safe(g, k):
    z = np.abs(_z(g, k))
    near_cat = np.min(np.abs(g[:, None] - np.array([0.9, 1.0, 1.1])[None, :]), axis=1) < _BOUNDARY_EPS
    ok = (z <= 3.0 - _Z_MARGIN) & (np.abs(z - 2.0) >= _Z_MARGIN) & ~near_cat
    return ok, z > 2.0


def _kept_pairs(rng_seed: int) -> tuple[np.ndarray, np.ndarray]:
    fam, par = CopulaFamily(Kind.STUDENT_T), CopulaParams(0.427, nu=5.325)
    u, v = sample_pairs(fam, par, 400_000, rng_seed, stage=STAGE_FIXTURE)
    g1, g2 = apply_margins(u, v, KEPT_MARGINS)
    ok1, zone1 = _safe(g1, 0)
    ok2, zone2 = _safe(g2, 1)
    ok = ok1 & ok2
    cell = gap_category(g1) * 4 + gap_category(g2)
    need = TARGET_COUNTS.reshape(-1).copy()
    quota = [OUTSIDE_2SD[0] - OUTLIERS_3SD[0], OUTSIDE_2SD[1] - OUTLIERS_3SD[1]]
    chosen = []
    # pass 1: zone candidates, respecting both quotas exactly
    for i in np.nonzero(ok & (zone1 | zone2))[0]:
        c = cell[i]
        if need[c] == 0:
            continue
        if (zone1[i] and quota[0] == 0) or (zone2[i] and quota[1] == 0):
            continue
        chosen.append(i)
        need[c] -= 1
        quota[0] -= int(zone1[i])
        quota[1] -= int(zone2[i])
        if quota == [0, 0]:
            break
    if quota != [0, 0]:
        raise RuntimeError("fixture zone quotas not met")
    # pass 2: fill cells with candidates inside 2 SD
    for i in np.nonzero(ok & ~zone1 & ~zone2)[0]:
        c = cell[i]
        if need[c] > 0:
            chosen.append(i)
            need[c] -= 1
    if need.any():
        raise RuntimeError("fixture cell quotas not met")
    idx = np.array(sorted(chosen))
    return g1[idx], g2[idx]


def _solve_outliers(kept, inner, k, rng, n_out):
    """Outlier values for vehicle k making the full-sample moments exact."""
    mu, sd = TARGET_MEAN[k], TARGET_SD[k]
    lo_cut, hi_cut = mu - 3.0 * sd, mu + 3.0 * sd
    lo_min, hi_max = EXTREMES[k]
    n_total = N_GARAGES
    base = np.concatenate([kept, inner])
    total_sum = n_total * mu
    total_ss = (n_total - 1) * sd * sd + n_total * mu * mu  # sum of squares about zero
    floor = hi_cut + 2 * _Z_MARGIN * sd
    for n_low in range(2, n_out - 4):
        n_high = n_out - n_low
        low = np.concatenate([[lo_min], rng.uniform(lo_min + 0.01, lo_cut - 3 * _Z_MARGIN * sd, n_low - 1)])
        # heavy-tailed (Pareto quantile) profile for the high outliers
        q = (np.arange(n_high - 3) + 0.5) / (n_high - 3)
        shape = (1.0 - q) ** (-1.0 / 1.5) - 1.0
        jitter = rng.uniform(0.9, 1.1, shape.size)
        for scale in np.arange(0.02, 2.0, 0.01):
            spread = np.minimum(floor + scale * shape * jitter, hi_max - 0.01)
            fixed = np.concatenate([base, low, [hi_max], spread])
            a_plus_b = total_sum - math.fsum(fixed)
            a2_plus_b2 = total_ss - math.fsum(fixed * fixed)
            disc = 2.0 * a2_plus_b2 - a_plus_b * a_plus_b
            if disc < 0:
                continue
            a = (a_plus_b + math.sqrt(disc)) / 2.0
            b = (a_plus_b - math.sqrt(disc)) / 2.0
            if floor < b <= a < hi_max:
                return np.concatenate([low, [hi_max], spread, [a, b]])
    raise RuntimeError("outlier moment equations have no admissible solution")


@dataclass(frozen=True)
class FixtureGaps:
    gap1: np.ndarray
    gap2: np.ndarray
    removed: np.ndarray  # boolean mask, garage removed by 3 SD trimming


def build_fixture_gaps(seed: int = FIXTURE_SEED) -> FixtureGaps:
    k1, k2 = _kept_pairs(seed)
    rng = stream(seed, STAGE_FIXTURE, 1)
    only1 = OUTLIERS_3SD[0] - BOTH_OUTLIERS
    only2 = OUTLIERS_3SD[1] - BOTH_OUTLIERS
    # inner coordinates of removed garages: vehicle 2 for v1-only, vehicle 1 for v2-only
    inner2 = TARGET_MEAN[1] + TARGET_SD[1] * rng.uniform(-1.4, 1.4, only1)
    inner1 = TARGET_MEAN[0] + TARGET_SD[0] * rng.uniform(-1.4, 1.4, only2)
    out1 = _solve_outliers(k1, inner1, 0, rng, OUTLIERS_3SD[0])
    out2 = _solve_outliers(k2, inner2, 1, rng, OUTLIERS_3SD[1])
    out1 = out1[rng.permutation(out1.size)]
    out2 = out2[rng.permutation(out2.size)]
    # removed garages: 10 with both outliers, then v1-only, then v2-only
    r1 = np.concatenate([out1[:BOTH_OUTLIERS], out1[BOTH_OUTLIERS:], inner1])
    r2 = np.concatenate([out2[:BOTH_OUTLIERS], inner2, out2[BOTH_OUTLIERS:]])
    g1 = np.concatenate([k1, r1])
    g2 = np.concatenate([k2, r2])
    removed = np.r_[np.zeros(k1.size, bool), np.ones(r1.size, bool)]
    perm = rng.permutation(g1.size)
    return FixtureGaps(g1[perm], g2[perm], removed[perm])


def build_fixture_rows(seed: int = FIXTURE_SEED) -> list[dict]:
    fx = build_fixture_gaps(seed)
    return synthetic_records(fx.gap1, fx.gap2, stream(seed, STAGE_FIXTURE, 2))


def fixture_path():
    """Path of the bundled fixture inside the installed package."""
    return resources.files("gapcopula").joinpath("data", FIXTURE_FILE)


def write_fixture(path, seed: int = FIXTURE_SEED) -> None:
    """Rebuild the fixture CSV; the bundled file is this function's output."""
    write_records(build_fixture_rows(seed), path, columns=COLUMNS)


if __name__ == "__main__":
    import sys

    write_fixture(sys.argv[1] if len(sys.argv) > 1 else FIXTURE_FILE)
