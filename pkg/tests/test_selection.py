import math

import numpy as np
import pytest
from scipy import stats

from gapcopula.errors import DataError, DomainError
from gapcopula.estimation import pointwise_loglik, pseudo_observations
from gapcopula.families import CopulaFamily, CopulaParams, Kind, Rotation
from gapcopula.selection import (
    DEFAULT_GRID,
    CurveKind,
    fit_all_and_rank,
    clarke_test,
    lambda_boundaries,
    lambda_deviation,
    lambda_empirical,
    lambda_theoretical,
    vuong_test,
)
from gapcopula.simulation import sample_pairs

SUBSET = [
    CopulaFamily(Kind.GAUSSIAN),
    CopulaFamily(Kind.CLAYTON),
    CopulaFamily(Kind.GUMBEL),
    CopulaFamily(Kind.FRANK),
    CopulaFamily(Kind.CLAYTON, Rotation.DEG180),
]


@pytest.fixture(scope="module")
def clayton_sample():
    u, v = sample_pairs(CopulaFamily(Kind.CLAYTON), CopulaParams(1.2), 3000, 77)
    return pseudo_observations(u, v)


@pytest.fixture(scope="module")
def clayton_report(clayton_sample):
    return fit_all_and_rank(clayton_sample, SUBSET)


def test_true_family_ranks_first(clayton_report):
    assert clayton_report.ranking_aic[0] == "clayton"
    assert clayton_report.ranking_bic[0] == "clayton"
    assert clayton_report.best.key == "clayton"


def test_rankings_are_sorted(clayton_report):
    fits = clayton_report.fits
    aics = [fits[k].aic for k in clayton_report.ranking_aic]
    bics = [fits[k].bic for k in clayton_report.ranking_bic]
    assert aics == sorted(aics)
    assert bics == sorted(bics)
    assert [f.key for f in clayton_report.table()] == [f.key for f in SUBSET]


def test_pairwise_tests_cover_top_three(clayton_report):
    keys = [(t.key_a, t.key_b) for t in clayton_report.pairwise_tests]
    top = clayton_report.ranking_aic[:3]
    assert keys == [(top[0], top[1]), (top[0], top[2]), (top[1], top[2])]


def test_vuong_statistic_by_hand(clayton_sample, clayton_report):
    fits = clayton_report.fits
    a, b = fits["clayton"], fits["frank"]
    m = pointwise_loglik(a.family, a.params, clayton_sample) - pointwise_loglik(b.family, b.params, clayton_sample)
    n = m.size
    ref = m.sum() / (math.sqrt(n) * m.std())
    stat, p = vuong_test("clayton", "frank", clayton_sample, fits)
    assert stat == pytest.approx(ref, rel=1e-10)
    assert p == pytest.approx(2 * stats.norm.sf(abs(ref)), rel=1e-8)
    assert stat > 1.96


def test_vuong_schwarz_correction_for_unequal_sizes(clayton_sample):
    fams = [CopulaFamily(Kind.CLAYTON), CopulaFamily(Kind.BB1)]
    rep = fit_all_and_rank(clayton_sample, fams, n_tests=0)
    fa, fb = rep.fits["clayton"], rep.fits["bb1"]
    m = pointwise_loglik(fa.family, fa.params, clayton_sample) - pointwise_loglik(fb.family, fb.params, clayton_sample)
    n = m.size
    ref = (m.sum() + 0.5 * math.log(n)) / (math.sqrt(n) * m.std())
    stat, _ = vuong_test("clayton", "bb1", clayton_sample, rep.fits)
    assert stat == pytest.approx(ref, rel=1e-10)


def test_clarke_sign_count_by_hand(clayton_sample, clayton_report):
    fits = clayton_report.fits
    a, b = fits["clayton"], fits["gumbel"]
    m = pointwise_loglik(a.family, a.params, clayton_sample) - pointwise_loglik(b.family, b.params, clayton_sample)
    count, p = clarke_test("clayton", "gumbel", clayton_sample, fits)
    assert count == int(np.sum(m > 0))
    assert p == pytest.approx(stats.binomtest(count, m.size, 0.5).pvalue, rel=1e-12)
    assert count > m.size / 2


def test_parallel_fits_identical(clayton_sample, clayton_report):
    par = fit_all_and_rank(clayton_sample, SUBSET, workers=4)
    assert par.fits == clayton_report.fits
    assert par.ranking_bic == clayton_report.ranking_bic


def test_selection_needs_100_pairs():
    u, v = sample_pairs(CopulaFamily(Kind.FRANK), CopulaParams(2.0), 60, 1)
    with pytest.raises(DataError):
        fit_all_and_rank(pseudo_observations(u, v), SUBSET)


def test_lambda_empirical_clayton():
    u, v = sample_pairs(CopulaFamily(Kind.CLAYTON), CopulaParams(2.0), 20000, 4)
    curve = lambda_empirical(pseudo_observations(u, v))
    assert curve.kind is CurveKind.EMPIRICAL
    g = curve.v_grid
    assert np.max(np.abs(curve.lam - (g**3 - g) / 2)) < 0.02


def test_lambda_curves_lie_between_boundaries():
    u, v = sample_pairs(CopulaFamily(Kind.GUMBEL), CopulaParams(1.5), 2000, 8)
    curve = lambda_empirical(pseudo_observations(u, v))
    ind, com = lambda_boundaries()
    assert np.all(curve.lam <= com.lam)
    assert np.all(curve.lam >= ind.lam - 0.03)
    assert ind.lam[49] == pytest.approx(0.5 * math.log(0.5))


def test_lambda_theoretical_closed_form_and_simulated():
    c = lambda_theoretical(CopulaFamily(Kind.CLAYTON), CopulaParams(1.0))
    assert c.lam[49] == pytest.approx(-0.25)
    assert c.label == "clayton"
    t1 = lambda_theoretical(CopulaFamily(Kind.STUDENT_T), CopulaParams(0.427, nu=5.325), seed=3)
    t2 = lambda_theoretical(CopulaFamily(Kind.STUDENT_T), CopulaParams(0.427, nu=5.325), seed=3)
    np.testing.assert_array_equal(t1.lam, t2.lam)
    assert len(t1.lam) == len(DEFAULT_GRID) == 99


def test_lambda_simulation_converges():
    fam, p = CopulaFamily(Kind.STUDENT_T), CopulaParams(0.427, nu=5.325)
    a = lambda_theoretical(fam, p, n_sim=100_000, seed=1)
    b = lambda_theoretical(fam, p, n_sim=100_000, seed=2)
    assert lambda_deviation(a, b) < 0.01


def test_lambda_domain_and_grid_errors():
    with pytest.raises(DomainError):
        lambda_theoretical(CopulaFamily(Kind.JOE), CopulaParams(0.5))
    with pytest.raises(DataError):
        lambda_boundaries([0.0, 0.5])
    a, _ = lambda_boundaries([0.2, 0.4])
    b, _ = lambda_boundaries([0.2, 0.5])
    with pytest.raises(DataError):
        lambda_deviation(a, b)
