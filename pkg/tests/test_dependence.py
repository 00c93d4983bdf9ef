import math

import mpmath as mp
import numpy as np
import pytest
from scipy import stats

from conftest import TABLE_FITS, fit_id
from gapcopula.copula import copula_cdf
from gapcopula.dependence import (
    bb7_d4,
    debye1,
    joe_d2,
    kendall_tau_from_params,
    lambda_closed_form,
    params_from_kendall_tau,
    tail_dependence,
)
from gapcopula.errors import TauRangeError
from gapcopula.families import ALL_FAMILIES, CopulaFamily, CopulaParams, Kind, Rotation

mp.mp.dps = 30

MP_GENERATORS = {
    Kind.CLAYTON: lambda t, th, de: (t ** -th - 1) / th,
    Kind.FRANK: lambda t, th, de: -mp.log(mp.expm1(-th * t) / mp.expm1(-th)),
    Kind.GUMBEL: lambda t, th, de: (-mp.log(t)) ** th,
    Kind.JOE: lambda t, th, de: -mp.log(1 - (1 - t) ** th),
    Kind.BB1: lambda t, th, de: (t ** -th - 1) ** de,
    Kind.BB6: lambda t, th, de: (-mp.log(1 - (1 - t) ** th)) ** de,
    Kind.BB7: lambda t, th, de: (1 - (1 - t) ** th) ** -de - 1,
    Kind.BB8: lambda t, th, de: -mp.log((1 - (1 - de * t) ** th) / (1 - (1 - de) ** th)),
}


def generator_tau(kind, th, de=None):
    """1 + 4 * integral of phi/phi' over (0, 1) in high precision."""
    phi = MP_GENERATORS[kind]
    th = mp.mpf(th)
    de = None if de is None else mp.mpf(de)
    ratio = lambda t: phi(t, th, de) / mp.diff(lambda s: phi(s, th, de), t)
    return float(1 + 4 * mp.quad(ratio, [0, 0.5, 1]))


@pytest.mark.parametrize("kind,th,de", [
    (Kind.JOE, 1.436, None),
    (Kind.FRANK, 2.791, None),
    (Kind.FRANK, -5.0, None),
    (Kind.BB6, 1.5, 1.3),
    (Kind.BB7, 1.271, 0.418),
    (Kind.BB8, 6.0, 0.403),
    (Kind.BB8, 2.0, 0.9),
])
def test_quadrature_tau_matches_generator_oracle(kind, th, de):
    p = CopulaParams(th) if de is None else CopulaParams(th, delta=de)
    assert kendall_tau_from_params(CopulaFamily(kind), p) == pytest.approx(generator_tau(kind, th, de), abs=1e-8)


@pytest.mark.parametrize("th", [0.2, 1.0, 2.791, 10.0, 40.0])
def test_debye_against_mpmath(th):
    ref = mp.quad(lambda t: t / mp.expm1(t), [0, th]) / th
    assert debye1(th) == pytest.approx(float(ref), rel=1e-12)


@pytest.mark.parametrize("th", [1.05, 1.436, 3.0, 20.0, 40.0])
def test_joe_integral_digamma_closed_form(th):
    # integral of t log t (1 - t)^(b - 1) is B(2, b) (psi(2) - psi(2 + b))
    b = 2 * (1 - mp.mpf(th)) / th + 1
    ref = mp.beta(2, b) * (mp.digamma(2) - mp.digamma(2 + b))
    assert joe_d2(th) == pytest.approx(float(ref), rel=1e-10)


@pytest.mark.parametrize("th,de", [(1.0, 0.5), (1.271, 0.418), (2.5, 1.7), (12.0, 3.0), (40.0, 0.2)])
def test_bb7_tau_beta_closed_form(th, de):
    # with a = 2/theta - 1 the integral reduces to Beta functions
    a = mp.mpf(2) / th - 1
    d4 = -(mp.beta(a, 2) - mp.beta(a, 2 + de)) / th
    ref = float(1 + 4 / (mp.mpf(th) * de) * d4)
    tau = kendall_tau_from_params(CopulaFamily(Kind.BB7), CopulaParams(th, delta=de))
    assert tau == pytest.approx(ref, abs=1e-9)
    assert bb7_d4(th, de) == pytest.approx(float(d4), abs=1e-9)


def tawn_tau_oracle(kind, th, de):
    th, de = mp.mpf(th), mp.mpf(de)
    if kind is Kind.TAWN1:
        A = lambda t: (1 - de) * (1 - t) + ((de * (1 - t)) ** th + t ** th) ** (1 / th)
    else:
        A = lambda t: (1 - de) * t + ((1 - t) ** th + (de * t) ** th) ** (1 / th)
    return float(mp.quad(lambda t: t * (1 - t) * mp.diff(A, t, 2) / A(t), [0, 0.5, 1]))


@pytest.mark.parametrize("kind", [Kind.TAWN1, Kind.TAWN2])
@pytest.mark.parametrize("th,de", [(1.486, 0.483), (3.0, 0.9), (8.0, 0.2)])
def test_tawn_tau_oracle(kind, th, de):
    tau = kendall_tau_from_params(CopulaFamily(kind), CopulaParams(th, delta=de))
    assert tau == pytest.approx(tawn_tau_oracle(kind, th, de), abs=1e-7)


@pytest.mark.parametrize("r", [-0.8, 0.0, 0.406])
def test_elliptical_tau(r):
    expect = 2 / math.pi * math.asin(r)
    assert kendall_tau_from_params(CopulaFamily(Kind.GAUSSIAN), CopulaParams(r)) == pytest.approx(expect, abs=1e-15)
    t = kendall_tau_from_params(CopulaFamily(Kind.STUDENT_T), CopulaParams(r, nu=4.0))
    assert t == pytest.approx(expect, abs=1e-15)


def test_one_parameter_closed_forms():
    assert kendall_tau_from_params(CopulaFamily(Kind.CLAYTON), CopulaParams(2.0)) == pytest.approx(0.5)
    assert kendall_tau_from_params(CopulaFamily(Kind.GUMBEL), CopulaParams(4.0)) == pytest.approx(0.75)
    assert kendall_tau_from_params(CopulaFamily(Kind.BB1), CopulaParams(1.0, delta=2.0)) == pytest.approx(1 - 2 / 6)


def test_rotation_preserves_tau():
    for kind, p in [(Kind.JOE, CopulaParams(2.0)), (Kind.BB8, CopulaParams(3.0, delta=0.6)), (Kind.TAWN2, CopulaParams(2.0, delta=0.5))]:
        a = kendall_tau_from_params(CopulaFamily(kind), p)
        b = kendall_tau_from_params(CopulaFamily(kind, Rotation.DEG180), p)
        assert a == b


def test_frank_sign_symmetry():
    f = CopulaFamily(Kind.FRANK)
    assert kendall_tau_from_params(f, CopulaParams(-3.0)) == pytest.approx(-kendall_tau_from_params(f, CopulaParams(3.0)), abs=1e-12)
    assert kendall_tau_from_params(f, CopulaParams(0.0)) == 0.0


@pytest.mark.parametrize("family", ALL_FAMILIES, ids=lambda f: f.key)
@pytest.mark.parametrize("tau", [0.2, 0.281])
def test_tau_inversion_roundtrip(family, tau):
    try:
        p = params_from_kendall_tau(family, tau)
    except TauRangeError:
        pytest.skip("not attainable at the default second parameter")
    assert kendall_tau_from_params(family, p) == pytest.approx(tau, abs=1e-9)


def test_tau_inversion_out_of_range():
    with pytest.raises(TauRangeError):
        params_from_kendall_tau(CopulaFamily(Kind.CLAYTON), -0.2)
    with pytest.raises(TauRangeError):
        params_from_kendall_tau(CopulaFamily(Kind.GAUSSIAN), 1.0)


def test_negative_tau_for_frank_and_gaussian():
    p = params_from_kendall_tau(CopulaFamily(Kind.FRANK), -0.4)
    assert p.theta < 0
    assert kendall_tau_from_params(CopulaFamily(Kind.FRANK), p) == pytest.approx(-0.4, abs=1e-10)


def test_student_t_tail_formula():
    r, nu = 0.427, 5.325
    ref = 2 * stats.t.cdf(-math.sqrt(nu + 1) * math.sqrt((1 - r) / (1 + r)), nu + 1)
    td = tail_dependence(CopulaFamily(Kind.STUDENT_T), CopulaParams(r, nu=nu))
    assert td.lower == td.upper == pytest.approx(ref, rel=1e-12)
    assert td.lower == pytest.approx(0.1594, abs=3e-3)


def _diagonal_limits(family, p, eps=1e-7):
    lower = copula_cdf(family, p, eps, eps) / eps
    w = 1 - eps
    upper = (1 - 2 * w + copula_cdf(family, p, w, w)) / eps
    return lower, upper


@pytest.mark.parametrize("case", [c for c in TABLE_FITS if c[0].kind not in (Kind.GAUSSIAN, Kind.STUDENT_T)], ids=fit_id)
def test_tail_coefficients_match_diagonal_limits(case):
    fam, p = case
    td = tail_dependence(fam, p)
    lo, up = _diagonal_limits(fam, p)
    # slowly varying corrections allow a loose tolerance at eps = 1e-7
    assert td.lower == pytest.approx(lo, abs=0.02)
    assert td.upper == pytest.approx(up, abs=0.02)


def test_clayton_lower_tail_exponent():
    td = tail_dependence(CopulaFamily(Kind.CLAYTON), CopulaParams(2.0))
    assert td == (pytest.approx(2 ** -0.5), 0.0)


def test_rotation_swaps_tail_coefficients():
    p = CopulaParams(0.5, delta=1.5)
    a = tail_dependence(CopulaFamily(Kind.BB1), p)
    b = tail_dependence(CopulaFamily(Kind.BB1, Rotation.DEG180), p)
    assert (a.lower, a.upper) == (b.upper, b.lower)


def test_lambda_clayton_closed_form():
    v = np.linspace(0.05, 0.95, 19)
    lam = lambda_closed_form(CopulaFamily(Kind.CLAYTON), CopulaParams(1.0), v)
    np.testing.assert_allclose(lam, (v**2 - v) / 1.0, atol=1e-14)
    assert float(lambda_closed_form(CopulaFamily(Kind.CLAYTON), CopulaParams(1.0), [0.5])[0]) == pytest.approx(-0.25)


@pytest.mark.parametrize("kind,th,de", [
    (Kind.FRANK, 2.791, None), (Kind.GUMBEL, 1.352, None), (Kind.JOE, 1.436, None),
    (Kind.BB1, 0.254, 1.225), (Kind.BB6, 1.2, 1.351), (Kind.BB7, 1.271, 0.418), (Kind.BB8, 6.0, 0.403),
])
def test_lambda_matches_generator_ratio(kind, th, de):
    phi = MP_GENERATORS[kind]
    v = [0.1, 0.37, 0.5, 0.8, 0.99]
    p = CopulaParams(th) if de is None else CopulaParams(th, delta=de)
    got = lambda_closed_form(CopulaFamily(kind), p, v)
    for x, g in zip(v, got):
        ref = phi(mp.mpf(x), mp.mpf(th), de and mp.mpf(de)) / mp.diff(lambda s: phi(s, mp.mpf(th), de and mp.mpf(de)), mp.mpf(x))
        assert g == pytest.approx(float(ref), abs=1e-10)


def test_lambda_none_without_generator():
    assert lambda_closed_form(CopulaFamily(Kind.STUDENT_T), CopulaParams(0.4, nu=5.0), [0.5]) is None
    assert lambda_closed_form(CopulaFamily(Kind.CLAYTON, Rotation.DEG180), CopulaParams(1.0), [0.5]) is None
