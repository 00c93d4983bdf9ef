"""Distribution function, density and conditional distributions of all families.

All functions are vectorised over ``u`` and ``v`` (numpy broadcasting) and
return a Python float when every input is scalar. Inputs are clamped to
``[CLAMP, 1 - CLAMP]`` before evaluation.
"""

from __future__ import annotations

import numpy as np

from . import archimedean as arch
from .elliptical import Gaussian, StudentT
from .errors import ConvergenceError, DensityOverflowError
from .extreme_value import Tawn
from .families import CopulaFamily, CopulaParams, Kind, check_params

CLAMP = 1e-10
FRANK_INDEPENDENCE = 1e-8

_IMPL = {
    Kind.GAUSSIAN: Gaussian(),
    Kind.STUDENT_T: StudentT(),
    Kind.CLAYTON: arch.Clayton(),
    Kind.GUMBEL: arch.Gumbel(),
    Kind.FRANK: arch.Frank(),
    Kind.JOE: arch.Joe(),
    Kind.BB1: arch.BB1(),
    Kind.BB6: arch.BB6(),
    Kind.BB7: arch.BB7(),
    Kind.BB8: arch.BB8(),
    Kind.TAWN1: Tawn(1),
    Kind.TAWN2: Tawn(2),
}


def implementation(kind: Kind):
    return _IMPL[kind]


def clamp(x):
    return np.clip(np.asarray(x, dtype=float), CLAMP, 1.0 - CLAMP)


def _second(family: CopulaFamily, params: CopulaParams):
    return params.nu if family.kind is Kind.STUDENT_T else params.delta


def is_independence(family: CopulaFamily, params: CopulaParams) -> bool:
    """Parameter values at which the family reduces to C(u, v) = uv."""
    kind, th, de = family.kind, params.theta, params.delta
    if kind is Kind.GAUSSIAN:
        return th == 0.0
    if kind is Kind.FRANK:
        return abs(th) < FRANK_INDEPENDENCE
    if kind is Kind.GUMBEL:
        return th == 1.0
    if kind is Kind.BB8:
        return th == 1.0
    if kind in (Kind.TAWN1, Kind.TAWN2):
        return de == 0.0 or th == 1.0
    return False


def _out(x, scalar):
    return float(x) if scalar else x


def _prepare(family, params, u, v):
    check_params(family, params)
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    u, v = np.broadcast_arrays(clamp(u), clamp(v))
    return scalar, u, v


def _cdf_unrotated(family, params, u, v):
    if is_independence(family, params):
        return u * v
    return _IMPL[family.kind].cdf(u, v, params.theta, _second(family, params))


def _logpdf_unrotated(family, params, u, v):
    if is_independence(family, params):
        return np.zeros(np.broadcast(u, v).shape)
    return _IMPL[family.kind].logpdf(u, v, params.theta, _second(family, params))


def _h_unrotated(family, params, u, v):
    if is_independence(family, params):
        return np.broadcast_to(v, np.broadcast(u, v).shape).astype(float)
    return _IMPL[family.kind].h(u, v, params.theta, _second(family, params))


def copula_cdf(family: CopulaFamily, params: CopulaParams, u, v):
    """C(u, v); the survival variant is u + v - 1 + C(1 - u, 1 - v)."""
    scalar, u, v = _prepare(family, params, u, v)
    if family.rotated:
        c = u + v - 1.0 + _cdf_unrotated(family, params, 1.0 - u, 1.0 - v)
    else:
        c = _cdf_unrotated(family, params, u, v)
    c = np.clip(c, np.maximum(u + v - 1.0, 0.0), np.minimum(u, v))
    return _out(c, scalar)


def _raw_logpdf(family, params, u, v):
    with np.errstate(all="ignore"):
        if family.rotated:
            return _logpdf_unrotated(family, params, 1.0 - u, 1.0 - v)
        return _logpdf_unrotated(family, params, u, v)


def copula_logpdf(family: CopulaFamily, params: CopulaParams, u, v):
    """log c(u, v). Raises DensityOverflowError when not representable."""
    scalar, u, v = _prepare(family, params, u, v)
    try:
        out = _raw_logpdf(family, params, u, v)
    except FloatingPointError as exc:
        raise DensityOverflowError(str(exc)) from exc
    if not np.all(np.isfinite(out)):
        raise DensityOverflowError(f"{family.key} density overflow at {params}")
    return _out(out, scalar)


def copula_pdf(family: CopulaFamily, params: CopulaParams, u, v):
    """Copula density c(u, v) = d^2 C / du dv."""
    lp = copula_logpdf(family, params, u, v)
    with np.errstate(over="raise"):
        try:
            return np.exp(lp) if np.ndim(lp) else float(np.exp(lp))
        except FloatingPointError as exc:
            raise DensityOverflowError(f"{family.key} density overflow at {params}") from exc


def _h(family, params, u, v):
    if family.rotated:
        return 1.0 - _h_unrotated(family, params, 1.0 - u, 1.0 - v)
    return _h_unrotated(family, params, u, v)


def h_function(family: CopulaFamily, params: CopulaParams, u, v):
    """P(V <= v | U = u) = dC(u, v)/du."""
    scalar, u, v = _prepare(family, params, u, v)
    return _out(np.clip(_h(family, params, u, v), 0.0, 1.0), scalar)


def _hinv_numeric(family, params, u, q, tol=1e-13, maxiter=200):
    """Solve h(u, v) = q for v by Newton steps safeguarded with bisection."""
    lo = np.full(u.shape, CLAMP)
    hi = np.full(u.shape, 1.0 - CLAMP)
    v = np.clip(q, CLAMP, 1.0 - CLAMP).astype(float)
    active = np.ones(u.shape, dtype=bool)
    for _ in range(maxiter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            return v
        ui, vi, qi = u[idx], v[idx], q[idx]
        r = _h(family, params, ui, vi) - qi
        done = np.abs(r) <= tol
        lo_i = np.where(r < 0, vi, lo[idx])
        hi_i = np.where(r > 0, vi, hi[idx])
        with np.errstate(all="ignore"):
            dens = np.exp(_raw_logpdf(family, params, ui, vi))
            step = vi - r / dens
        ok = np.isfinite(step) & (step > lo_i) & (step < hi_i)
        new_v = np.where(ok, step, 0.5 * (lo_i + hi_i))
        narrow = (hi_i - lo_i) <= 4e-16 * np.maximum(1.0, hi_i)
        done |= narrow
        lo[idx], hi[idx] = lo_i, hi_i
        v[idx] = np.where(done, vi, new_v)
        active[idx[done]] = False
    if np.any(active):
        raise ConvergenceError(f"h-inverse did not converge for {family.key} at {params}")
    return v


def h_inverse(family: CopulaFamily, params: CopulaParams, u, q):
    """Return v with h_function(u, v) = q (the conditional quantile)."""
    check_params(family, params)
    scalar = np.ndim(u) == 0 and np.ndim(q) == 0
    u, q = np.broadcast_arrays(clamp(u), clamp(q))
    shape = u.shape
    u, q = u.reshape(-1).copy(), q.reshape(-1).copy()
    if is_independence(family, params):
        v = q.copy()
    elif family.kind in (Kind.GAUSSIAN, Kind.STUDENT_T):
        v = _IMPL[family.kind].hinv(u, q, params.theta, params.nu)
    else:
        v = _hinv_numeric(family, params, u, q)
    return _out(clamp(v).reshape(shape), scalar)
