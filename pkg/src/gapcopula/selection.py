"""Model comparison: information-criterion ranking, Vuong and Clarke tests, lambda curves."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from .dependence import lambda_closed_form
from .errors import DataError, DegenerateError
from .estimation import FitResult, PseudoSample, empirical_copula_at_points, fit_mle, pointwise_loglik
from .families import ALL_FAMILIES, CopulaFamily, CopulaParams, check_params
from .simulation import STAGE_LAMBDA, sample_pairs

DEFAULT_GRID = np.round(np.arange(1, 100) / 100.0, 2)
LAMBDA_N = 1000


@dataclass(frozen=True)
class PairwiseTest:
    key_a: str
    key_b: str
    vuong_statistic: float
    vuong_p: float
    clarke_statistic: int
    clarke_p: float

    def as_tuple(self):
        return (self.key_a, self.key_b, self.vuong_statistic, self.vuong_p, self.clarke_statistic, self.clarke_p)


@dataclass(frozen=True)
class SelectionReport:
    fits: dict
    ranking_aic: tuple
    ranking_bic: tuple
    pairwise_tests: tuple

    @property
    def best(self) -> FitResult:
        """Lowest-BIC model, the primary criterion for non-nested comparison."""
        return self.fits[self.ranking_bic[0]]

    def table(self) -> list[FitResult]:
        """Fits in the canonical 21-family order."""
        return list(self.fits.values())


def _rank(fits: Mapping[str, FitResult], attr: str) -> tuple:
    def key(k):
        x = getattr(fits[k], attr)
        return (0 if math.isfinite(x) else 1, x if math.isfinite(x) else 0.0, k)

    return tuple(sorted(fits, key=key))


def _diffs(key_a: str, key_b: str, s: PseudoSample, fits: Mapping[str, FitResult]):
    fa, fb = fits[key_a], fits[key_b]
    la = pointwise_loglik(fa.family, fa.params, s)
    lb = pointwise_loglik(fb.family, fb.params, s)
    return la - lb, fa.family.n_params - fb.family.n_params


def vuong_test(key_a: str, key_b: str, s: PseudoSample, fits: Mapping[str, FitResult]) -> tuple[float, float]:
    """Schwarz-corrected Vuong statistic; positive values favour model a.

    Returns (statistic, two-sided normal p-value).
    """
    m, dk = _diffs(key_a, key_b, s, fits)
    n = m.size
    sd = float(np.std(m))
    if not sd >= 1e-12:
        raise DegenerateError(f"log-likelihood differences of {key_a} and {key_b} have no variance")
    stat = (math.fsum(m) - dk / 2.0 * math.log(n)) / (math.sqrt(n) * sd)
    return stat, float(2.0 * stats.norm.sf(abs(stat)))


def clarke_test(key_a: str, key_b: str, s: PseudoSample, fits: Mapping[str, FitResult]) -> tuple[int, float]:
    """Schwarz-corrected Clarke sign test.

    Returns (B, two-sided exact binomial p-value) with B the number of
    observations whose corrected log-density difference favours model a.
    """
    m, dk = _diffs(key_a, key_b, s, fits)
    n = m.size
    if not float(np.std(m)) >= 1e-12:
        raise DegenerateError(f"log-likelihood differences of {key_a} and {key_b} have no variance")
    b = int(np.sum(m - dk / n * math.log(n) / 2.0 > 0.0))
    return b, float(stats.binomtest(b, n, 0.5).pvalue)


def fit_all_and_rank(
    s: PseudoSample,
    families: Sequence[CopulaFamily] = ALL_FAMILIES,
    workers: Optional[int] = None,
    n_tests: int = 3,
) -> SelectionReport:
    """Fit every family, rank by AIC and BIC, test the top AIC models pairwise."""
    if s.n < 100:
        raise DataError(f"model selection needs at least 100 pairs, got {s.n}")
    families = list(families)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda f: fit_mle(f, s), families))
    else:
        results = [fit_mle(f, s) for f in families]
    fits = {r.key: r for r in results}
    by_aic = _rank(fits, "aic")
    tests = []
    top = by_aic[:n_tests]
    for i in range(len(top)):
        for j in range(i + 1, len(top)):
            a, b = top[i], top[j]
            try:
                vs, vp = vuong_test(a, b, s, fits)
                cs, cp = clarke_test(a, b, s, fits)
            except DegenerateError:
                vs, vp, cs, cp = math.nan, math.nan, -1, math.nan
            tests.append(PairwiseTest(a, b, vs, vp, cs, cp))
    return SelectionReport(fits, by_aic, _rank(fits, "bic"), tuple(tests))


# ---------------------------------------------------------------- lambda curves


class CurveKind(str, enum.Enum):
    EMPIRICAL = "empirical"
    THEORETICAL = "theoretical"
    INDEPENDENCE = "independence"
    COMONOTONICITY = "comonotonicity"


@dataclass(frozen=True)
class LambdaCurve:
    v_grid: np.ndarray
    lam: np.ndarray
    kind: CurveKind
    label: str = ""

    @property
    def lambda_(self) -> np.ndarray:
        return self.lam


def _grid(v_grid) -> np.ndarray:
    g = DEFAULT_GRID if v_grid is None else np.asarray(v_grid, dtype=float)
    if np.any((g <= 0.0) | (g >= 1.0)):
        raise DataError("lambda grid must lie strictly inside (0, 1)")
    return g


def _empirical_lambda(u, v, grid) -> np.ndarray:
    w = np.sort(empirical_copula_at_points(u, v))
    k = np.searchsorted(w, grid, side="right") / w.size
    # K(v) >= v for every copula; project sampling noise onto that constraint
    return np.minimum(grid - k, 0.0)


def lambda_empirical(s: PseudoSample, v_grid=None) -> LambdaCurve:
    """lambda(v) = v - K_n(v) from the empirical copula at the sample points."""
    if s.n < 100:
        raise DataError(f"empirical lambda needs at least 100 pairs, got {s.n}")
    g = _grid(v_grid)
    return LambdaCurve(g, _empirical_lambda(s.u, s.v, g), CurveKind.EMPIRICAL, "empirical")


def lambda_theoretical(
    family: CopulaFamily,
    params: CopulaParams,
    v_grid=None,
    n_sim: int = LAMBDA_N,
    seed: int = 0,
) -> LambdaCurve:
    """phi(v)/phi'(v) for unrotated Archimedean families.

    Other families have no generator; their curve is the empirical lambda of
    ``n_sim`` pairs simulated from the copula.
    """
    check_params(family, params)
    g = _grid(v_grid)
    closed = lambda_closed_form(family, params, g)
    if closed is not None:
        lam = np.minimum(np.asarray(closed, dtype=float), 0.0)
    else:
        u, v = sample_pairs(family, params, n_sim, seed, stage=STAGE_LAMBDA)
        lam = _empirical_lambda(u, v, g)
    return LambdaCurve(g, lam, CurveKind.THEORETICAL, family.key)


def lambda_boundaries(v_grid=None) -> tuple[LambdaCurve, LambdaCurve]:
    """Independence (v log v) and comonotonicity (0) reference curves."""
    g = _grid(v_grid)
    return (
        LambdaCurve(g, g * np.log(g), CurveKind.INDEPENDENCE, "independence"),
        LambdaCurve(g, np.zeros_like(g), CurveKind.COMONOTONICITY, "comonotonicity"),
    )


def lambda_deviation(a: LambdaCurve, b: LambdaCurve) -> float:
    """Maximum absolute difference of two curves on a shared grid."""
    if a.v_grid.shape != b.v_grid.shape or not np.allclose(a.v_grid, b.v_grid):
        raise DataError("curves are on different grids")
    return float(np.max(np.abs(a.lam - b.lam)))
