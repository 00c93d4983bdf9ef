"""Kendall's tau, its inversion, and tail-dependence coefficients."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate, optimize, special

from .copula import FRANK_INDEPENDENCE, implementation, is_independence
from .errors import ConvergenceError, TauRangeError
from .families import (
    ARCHIMEDEAN,
    CopulaFamily,
    CopulaParams,
    Kind,
    TailDependence,
    check_params,
)

QUAD_EPSABS = 1e-8
_T_CLAMP = 1e-12

# Second parameter held fixed when inverting tau for two-parameter families.
DEFAULT_DELTA = {
    Kind.BB1: 1.2,
    Kind.BB6: 1.3,
    Kind.BB7: 0.4,
    Kind.BB8: 0.5,
    Kind.TAWN1: 0.5,
    Kind.TAWN2: 0.5,
}


def _quad(f, a, b, epsabs=QUAD_EPSABS, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=1e-10, limit=400, **kw)
    # roundoff warnings are tolerated; a large error estimate is not
    if not math.isfinite(val) or err > max(100.0 * epsabs, 1e-6):
        raise ConvergenceError(f"quadrature did not converge (estimate {val}, error {err})")
    return val


def _clamped(f):
    return lambda t: f(min(max(t, _T_CLAMP), 1.0 - _T_CLAMP))


def debye1(theta: float) -> float:
    """First-order Debye function (1/theta) * int_0^theta t / (e^t - 1) dt."""
    if theta == 0.0:
        return 1.0

    def integrand(t):
        return 1.0 if t == 0.0 else t / math.expm1(t)

    return _quad(integrand, 0.0, theta, epsabs=1e-13) / theta


def joe_d2(theta: float) -> float:
    """int_0^1 t log(t) (1 - t)^(2(1 - theta)/theta) dt.

    Written as -int_0^1 g(t) (1 - t)^(e + 1) dt with g(t) = -t log(t) / (1 - t)
    bounded, so an algebraic-weight rule absorbs the endpoint singularity.
    """
    e = 2.0 * (1.0 - theta) / theta

    def g(t):
        if t >= 1.0:
            return 1.0
        if t <= 0.0:
            return 0.0
        return -t * math.log(t) / (1.0 - t)

    return -_quad(g, 0.0, 1.0, weight="alg", wvar=(0.0, e + 1.0))


def bb6_d3(theta: float) -> float:
    """int_0^1 log(1 - (1-t)^theta) (1 - (1-t)^theta) / (1-t)^(theta-1) dt."""

    def f(t):
        lw = theta * math.log1p(-t)
        w = math.exp(lw)
        return math.log1p(-w) * (1.0 - w) * math.exp(-(theta - 1.0) * math.log1p(-t))

    return _quad(_clamped(f), 0.0, 1.0)


def bb7_d4(theta: float, delta: float) -> float:
    """int_0^1 -(1-(1-t)^theta)^(delta+1) ((1-(1-t)^theta)^-delta - 1) / (1-t)^(theta-1) dt."""

    def f(t):
        w = math.exp(theta * math.log1p(-t))
        # x^(delta+1) (x^-delta - 1) = x (1 - x^delta), x = 1 - w
        one_minus_xd = -math.expm1(delta * math.log1p(-w))
        return -(1.0 - w) * one_minus_xd * math.exp(-(theta - 1.0) * math.log1p(-t))

    return _quad(_clamped(f), 0.0, 1.0)


def bb8_d5(theta: float, delta: float) -> float:
    """int_0^1 log(x / eta) x / (1 - delta t)^(theta-1) dt, x = 1 - (1 - delta t)^theta."""
    log_eta = math.log(-math.expm1(theta * math.log1p(-delta)))

    def f(t):
        lb = math.log1p(-delta * t)
        x = -math.expm1(theta * lb)
        return (math.log(x) - log_eta) * x * math.exp(-(theta - 1.0) * lb)

    return _quad(_clamped(f), 0.0, 1.0)


def _tawn_tau(kind: Kind, th: float, de: float) -> float:
    pick = implementation(kind).pickands

    def f(t):
        A, _, d2A = pick(t, th, de)
        return float(t * (1.0 - t) * d2A / A)

    return _quad(_clamped(f), 0.0, 1.0)


def kendall_tau_from_params(family: CopulaFamily, params: CopulaParams) -> float:
    """Population Kendall's tau implied by the parameters.

    Rotation by 180 degrees leaves tau unchanged.
    """
    check_params(family, params)
    kind, th, de = family.kind, params.theta, params.delta
    if is_independence(family, params):
        return 0.0
    if kind in (Kind.GAUSSIAN, Kind.STUDENT_T):
        return 2.0 / math.pi * math.asin(th)
    if kind is Kind.CLAYTON:
        return th / (th + 2.0)
    if kind is Kind.GUMBEL:
        return 1.0 - 1.0 / th
    if kind is Kind.FRANK:
        return 1.0 - 4.0 / th * (1.0 - debye1(th))
    if kind is Kind.JOE:
        return 1.0 + 4.0 / th**2 * joe_d2(th)
    if kind is Kind.BB1:
        return 1.0 - 2.0 / (de * (th + 2.0))
    if kind is Kind.BB6:
        return 1.0 + 4.0 / (th * de) * bb6_d3(th)
    if kind is Kind.BB7:
        return 1.0 + 4.0 / (th * de) * bb7_d4(th, de)
    if kind is Kind.BB8:
        return 1.0 + 4.0 / (th * de) * bb8_d5(th, de)
    return _tawn_tau(kind, th, de)


# Search intervals for numerical inversion over theta.
_THETA_SEARCH = {
    Kind.FRANK: (-80.0, 80.0),
    Kind.JOE: (1.0 + 1e-9, 40.0),
    Kind.BB6: (1.0, 40.0),
    Kind.BB7: (1.0, 40.0),
    Kind.BB8: (1.0, 40.0),
    Kind.TAWN1: (1.0, 40.0),
    Kind.TAWN2: (1.0, 40.0),
}


def params_from_kendall_tau(
    family: CopulaFamily, tau: float, delta: float | None = None, nu: float = 8.0
) -> CopulaParams:
    """Invert Kendall's tau over the primary parameter.

    Two-parameter families hold ``delta`` fixed (``DEFAULT_DELTA`` unless
    given); the Student-t copula uses ``nu`` degrees of freedom.
    """
    kind = family.kind
    if not -1.0 < tau < 1.0:
        raise TauRangeError(f"tau={tau} outside (-1, 1)")
    if kind is Kind.GAUSSIAN:
        return CopulaParams(math.sin(math.pi * tau / 2.0))
    if kind is Kind.STUDENT_T:
        return CopulaParams(math.sin(math.pi * tau / 2.0), nu=nu)
    if kind is Kind.CLAYTON:
        if tau <= 0.0:
            raise TauRangeError("Clayton requires tau > 0")
        return CopulaParams(2.0 * tau / (1.0 - tau))
    if kind is Kind.GUMBEL:
        if tau < 0.0:
            raise TauRangeError("Gumbel requires tau >= 0")
        return CopulaParams(1.0 / (1.0 - tau))
    if kind is Kind.FRANK and tau == 0.0:
        return CopulaParams(0.0)
    if kind is Kind.BB1:
        de = DEFAULT_DELTA[kind] if delta is None else delta
        th = 2.0 / (de * (1.0 - tau)) - 2.0
        if th <= 0.0:
            raise TauRangeError(f"BB1 with delta={de} requires tau > {1.0 - 1.0 / de:.4f}")
        return CopulaParams(th, de)

    de = None
    if kind in DEFAULT_DELTA:
        de = DEFAULT_DELTA[kind] if delta is None else delta
    lo, hi = _THETA_SEARCH[kind]

    def f(th):
        if kind is Kind.FRANK and abs(th) < FRANK_INDEPENDENCE:
            return -tau
        return kendall_tau_from_params(CopulaFamily(kind), CopulaParams(th, de)) - tau

    flo, fhi = f(lo), f(hi)
    if flo > 0.0 or fhi < 0.0:
        raise TauRangeError(
            f"tau={tau} not attainable by {kind.value}"
            + (f" with delta={de}" if de is not None else "")
        )
    if flo == 0.0:
        return CopulaParams(lo, de)
    th = optimize.brentq(f, lo, hi, xtol=1e-13, rtol=1e-14, maxiter=200)
    return CopulaParams(th, de)


def tail_dependence(family: CopulaFamily, params: CopulaParams) -> TailDependence:
    """Lower and upper tail-dependence coefficients.

    A 180 degree rotation swaps the two coefficients.
    """
    check_params(family, params)
    kind, th, de = family.kind, params.theta, params.delta
    lower = upper = 0.0
    if is_independence(family, params) or kind in (Kind.GAUSSIAN, Kind.FRANK, Kind.BB8):
        pass
    elif kind is Kind.STUDENT_T:
        nu = params.nu
        lam = 2.0 * special.stdtr(nu + 1.0, -math.sqrt(nu + 1.0) * math.sqrt((1.0 - th) / (1.0 + th)))
        lower = upper = float(lam)
    elif kind is Kind.CLAYTON:
        lower = 2.0 ** (-1.0 / th)
    elif kind in (Kind.GUMBEL, Kind.JOE):
        upper = 2.0 - 2.0 ** (1.0 / th)
    elif kind is Kind.BB1:
        lower, upper = 2.0 ** (-1.0 / (th * de)), 2.0 - 2.0 ** (1.0 / de)
    elif kind is Kind.BB6:
        upper = 2.0 - 2.0 ** (1.0 / (de * th))
    elif kind is Kind.BB7:
        lower, upper = 2.0 ** (-1.0 / de), 2.0 - 2.0 ** (1.0 / th)
    else:
        A_half = float(implementation(kind).pickands(0.5, th, de)[0])
        upper = 2.0 * (1.0 - A_half)
    if family.rotated:
        lower, upper = upper, lower
    return TailDependence(float(lower), float(upper))


def lambda_closed_form(family: CopulaFamily, params: CopulaParams, v) -> np.ndarray | None:
    """phi(v)/phi'(v) for unrotated Archimedean families, else None."""
    if family.kind not in ARCHIMEDEAN or family.rotated:
        return None
    check_params(family, params)
    v = np.clip(np.asarray(v, dtype=float), 1e-12, 1.0)
    if is_independence(family, params):
        with np.errstate(divide="ignore"):
            return np.where(v < 1.0, v * np.log(v), 0.0)
    return implementation(family.kind).lambda_fn(v, params.theta, params.delta)
