"""Pseudo-observations, Kendall's tau and exact maximum-likelihood fitting."""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, stats

from .copula import _raw_logpdf, copula_logpdf
from .dependence import (
    DEFAULT_DELTA,
    kendall_tau_from_params,
    params_from_kendall_tau,
    tail_dependence,
)
from .errors import ConvergenceError, CopulaError, DataError, DegenerateError, DensityOverflowError
from .families import CopulaFamily, CopulaParams, Kind, TailDependence, UnitPair, check_params

NU_MAX = 30.0
THETA_MAX = 60.0
Z_CRIT = 1.959963984540054


class TiePolicy(str, enum.Enum):
    AVERAGE_RANKS = "average-ranks"


@dataclass(frozen=True, eq=False)
class PseudoSample:
    """Rank-transformed pairs on the open unit square.

    ``u`` and ``v`` are read-only arrays; ``pairs`` materializes them as
    ``UnitPair`` tuples on demand.
    """

    u: np.ndarray
    v: np.ndarray
    tie_policy: TiePolicy = TiePolicy.AVERAGE_RANKS
    source_digest: str = ""

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        v = np.array(self.v, dtype=float)
        if u.shape != v.shape or u.ndim != 1:
            raise DataError("u and v must be one-dimensional and of equal length")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return int(self.u.size)

    @property
    def pairs(self) -> list[UnitPair]:
        return [UnitPair(float(a), float(b)) for a, b in zip(self.u, self.v)]

    def __len__(self) -> int:
        return self.n

    @classmethod
    def from_uniform(cls, u, v, source: str = "uniform") -> "PseudoSample":
        """Wrap values already on (0, 1), e.g. draws from a copula sampler."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
            raise DataError("uniform coordinates must lie strictly inside (0, 1)")
        return cls(u, v, source_digest=_digest(u, v, source))


def _digest(x, y, tag: str) -> str:
    h = hashlib.sha256(tag.encode())
    h.update(np.ascontiguousarray(x, dtype=float).tobytes())
    h.update(np.ascontiguousarray(y, dtype=float).tobytes())
    return h.hexdigest()[:16]


def pseudo_observations(x: Sequence[float], y: Sequence[float]) -> PseudoSample:
    """Average ranks divided by n + 1, coordinate-wise."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise DataError(f"length mismatch: {x.size} vs {y.size}")
    n = x.size
    if n < 10:
        raise DataError(f"need at least 10 pairs, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("missing or non-finite values")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateError("constant column")
    rx = stats.rankdata(x, method="average")
    ry = stats.rankdata(y, method="average")
    # digest the ranks so monotone transforms of the input give identical samples
    return PseudoSample(rx / (n + 1), ry / (n + 1), source_digest=_digest(rx, ry, "ranks"))


# ---------------------------------------------------------------- counting


def count_earlier(values, strict: bool) -> np.ndarray:
    """For each position i, the number of j < i with values[j] < values[i].

    With ``strict=False`` the comparison is ``<=``. Bottom-up merge counting:
    every pair j < i sits in sibling blocks at exactly one level, and all
    blocks of a level are searched at once by offsetting the keys with the
    block index.
    """
    vals = np.asarray(values).reshape(-1)
    n = vals.size
    out = np.zeros(n, dtype=np.int64)
    if n < 2:
        return out
    _, dense = np.unique(vals, return_inverse=True)
    dense = dense.astype(np.int64).reshape(-1)
    span = int(dense.max()) + 1
    side = "left" if strict else "right"
    pos = np.arange(n)
    width = 1
    while width < n:
        block = pos // (2 * width)
        left = (pos % (2 * width)) < width
        keys = block * span + dense
        lk = np.sort(keys[left])
        right = ~left
        out[right] += np.searchsorted(lk, keys[right], side) - np.searchsorted(
            lk, block[right] * span, "left"
        )
        width *= 2
    return out


def _tie_pairs(*cols) -> int:
    _, counts = np.unique(np.stack(cols), axis=1, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def _concordance_counts(x, y) -> tuple[int, int]:
    """(concordant, discordant) pair counts; ties in either coordinate count as neither."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.lexsort((y, x))
    ys = y[order]
    earlier = np.arange(x.size)
    less = count_earlier(ys, strict=True)
    leq = count_earlier(ys, strict=False)
    # earlier elements tied in x with smaller y were counted in ``less``
    tied_x_distinct_y = _tie_pairs(x) - _tie_pairs(x, y)
    concordant = int(np.sum(less)) - tied_x_distinct_y
    discordant = int(np.sum(earlier - leq))
    return concordant, discordant


def kendall_tau_reference(x, y) -> float:
    """O(n^2) tau-a by direct enumeration of pairs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    s = 0
    for i in range(n - 1):
        s += int(np.sum(np.sign(x[i + 1:] - x[i]) * np.sign(y[i + 1:] - y[i])))
    return s / (n * (n - 1) / 2)


def kendall_tau_xy(x, y) -> float:
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise DataError("Kendall's tau needs at least two pairs")
    c, d = _concordance_counts(x, y)
    return (c - d) / (n * (n - 1) / 2)


def sample_kendall_tau(s: PseudoSample) -> float:
    """(concordant - discordant) / (n choose 2) over all pairs."""
    return kendall_tau_xy(s.u, s.v)


def empirical_copula_at_points(u, v) -> np.ndarray:
    """#{j != i : u_j < u_i and v_j < v_i} / (n - 1) for each i."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = u.size
    # ascending u, descending v on u-ties so tied-u predecessors are never counted
    order = np.lexsort((-v, u))
    counts = np.empty(n, dtype=np.int64)
    counts[order] = count_earlier(v[order], strict=True)
    return counts / (n - 1)


# ---------------------------------------------------------------- likelihood


def pointwise_loglik(family: CopulaFamily, params: CopulaParams, s: PseudoSample) -> np.ndarray:
    return np.asarray(copula_logpdf(family, params, s.u, s.v), dtype=float).reshape(-1)


def log_likelihood(
    family: CopulaFamily, params: CopulaParams, s: PseudoSample, chunks: int = 1
) -> float:
    """Sum of log densities over the sample.

    The sum is exactly rounded (``math.fsum``) within each chunk and across
    chunks, so the result does not depend on ``chunks`` beyond one rounding.
    Raises DensityOverflowError when any term is not finite.
    """
    terms = pointwise_loglik(family, params, s)
    parts = [math.fsum(p) for p in np.array_split(terms, max(1, int(chunks)))]
    return math.fsum(parts)


# ---------------------------------------------------------------- transforms


@dataclass(frozen=True)
class _Bound:
    """Map between a real line coordinate z and a parameter interval."""

    kind: str  # "free", "log", "shift", "logit", "tanh"
    lo: float = 0.0
    hi: float = 0.0
    z_lo: float = -np.inf
    z_hi: float = np.inf

    def to_param(self, z: float) -> float:
        z = min(max(z, self.z_lo), self.z_hi)
        if self.kind == "free":
            return z
        if self.kind == "log":
            return self.lo + math.exp(z)
        if self.kind == "tanh":
            return math.tanh(z)
        return self.lo + (self.hi - self.lo) / (1.0 + math.exp(-z))  # logit

    def to_z(self, x: float) -> float:
        if self.kind == "free":
            return min(max(x, self.z_lo), self.z_hi)
        if self.kind == "log":
            z = math.log(max(x - self.lo, 1e-12))
        elif self.kind == "tanh":
            z = math.atanh(min(max(x, -1 + 1e-12), 1 - 1e-12))
        else:
            p = (x - self.lo) / (self.hi - self.lo)
            p = min(max(p, 1e-12), 1 - 1e-12)
            z = math.log(p / (1.0 - p))
        return min(max(z, self.z_lo), self.z_hi)

    @property
    def box(self) -> tuple[float, float]:
        """Admissible closed interval in parameter space."""
        if self.kind == "free":
            return self.z_lo, self.z_hi
        if self.kind == "tanh":
            return -1.0, 1.0
        if self.kind == "log":
            return self.lo, self.lo + math.exp(self.z_hi)
        return self.lo, self.hi


_RHO = _Bound("tanh", z_lo=-7.0, z_hi=7.0)
_NU = _Bound("logit", 2.0, NU_MAX, z_lo=-12.0, z_hi=25.0)
_POS = _Bound("log", 0.0, z_lo=math.log(1e-4), z_hi=math.log(THETA_MAX))
_GE1 = _Bound("log", 1.0, z_lo=-14.0, z_hi=math.log(THETA_MAX - 1.0))
_UNIT = _Bound("logit", 0.0, 1.0, z_lo=-14.0, z_hi=14.0)
_FRANK = _Bound("free", z_lo=-80.0, z_hi=80.0)

_BOUNDS = {
    Kind.GAUSSIAN: (_RHO,),
    Kind.STUDENT_T: (_RHO, _NU),
    Kind.CLAYTON: (_POS,),
    Kind.GUMBEL: (_GE1,),
    Kind.FRANK: (_FRANK,),
    Kind.JOE: (_GE1,),
    Kind.BB1: (_POS, _GE1),
    Kind.BB6: (_GE1, _GE1),
    Kind.BB7: (_GE1, _POS),
    Kind.BB8: (_GE1, _UNIT),
    Kind.TAWN1: (_GE1, _UNIT),
    Kind.TAWN2: (_GE1, _UNIT),
}


def _pack(family: CopulaFamily, x: Sequence[float]) -> CopulaParams:
    if family.kind is Kind.STUDENT_T:
        return CopulaParams(float(x[0]), nu=float(x[1]))
    if len(x) == 2:
        return CopulaParams(float(x[0]), float(x[1]))
    return CopulaParams(float(x[0]))


def _unpack(family: CopulaFamily, p: CopulaParams) -> list[float]:
    if family.kind is Kind.STUDENT_T:
        return [p.theta, p.nu]
    return [p.theta] if p.delta is None else [p.theta, p.delta]


# ---------------------------------------------------------------- fitting


@dataclass(frozen=True)
class FitResult:
    family: CopulaFamily
    params: CopulaParams
    ci: tuple[tuple[float, float], ...]
    loglik: float
    aic: float
    bic: float
    tau: float
    tails: TailDependence
    n: int
    converged: bool
    message: str = ""
    n_evals: int = 0

    @property
    def key(self) -> str:
        return self.family.key

    @property
    def k(self) -> int:
        return self.family.n_params

    def to_dict(self) -> dict:
        names = ["theta", "nu"] if self.family.kind is Kind.STUDENT_T else ["theta", "delta"]
        est = _unpack(self.family, self.params)
        return {
            "family": self.family.key,
            "name": self.family.display_name,
            "params": {nm: x for nm, x in zip(names, est)},
            "ci": {nm: list(c) for nm, c in zip(names, self.ci)},
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "tau": self.tau,
            "tail_lower": self.tails.lower,
            "tail_upper": self.tails.upper,
            "n": self.n,
            "converged": self.converged,
        }


def information_criteria(loglik: float, k: int, n: int) -> tuple[float, float]:
    """(AIC, BIC) = (-2 LL + 2k, -2 LL + k ln n)."""
    return -2.0 * loglik + 2.0 * k, -2.0 * loglik + k * math.log(n)


def _start_points(family: CopulaFamily, tau: float) -> list[list[float]]:
    """Starting parameter vectors, tau inversion first."""
    kind = family.kind
    starts = []
    try:
        starts.append(_unpack(family, params_from_kendall_tau(family, tau)))
    except (CopulaError, ValueError):
        pass
    # fallbacks when the sample tau is unattainable at the default delta
    fallback = {
        Kind.GAUSSIAN: [0.0],
        Kind.STUDENT_T: [0.0, 8.0],
        Kind.CLAYTON: [0.1],
        Kind.GUMBEL: [1.05],
        Kind.FRANK: [0.5],
        Kind.JOE: [1.05],
        Kind.BB1: [0.1, 1.05],
        Kind.BB6: [1.02, 1.02],
        Kind.BB7: [1.05, 0.1],
        Kind.BB8: [1.5, 0.5],
        Kind.TAWN1: [1.5, 0.5],
        Kind.TAWN2: [1.5, 0.5],
    }[kind]
    if kind in DEFAULT_DELTA and tau > 0.0:
        # second start with the secondary parameter moved to its other regime
        alt = {Kind.BB1: 2.0, Kind.BB6: 1.05, Kind.BB7: 1.0, Kind.BB8: 0.9, Kind.TAWN1: 0.9, Kind.TAWN2: 0.9}
        try:
            starts.append(_unpack(family, params_from_kendall_tau(family, tau, delta=alt[kind])))
        except (CopulaError, ValueError):
            pass
    if not starts:
        starts.append(fallback)
    return starts


def _objective(family: CopulaFamily, s: PseudoSample, bounds):
    n = s.n
    counter = [0]

    def f(z):
        counter[0] += 1
        x = [b.to_param(float(zi)) for b, zi in zip(bounds, z)]
        p = _pack(family, x)
        try:
            lp = _raw_logpdf(family, p, s.u, s.v)
        except (CopulaError, FloatingPointError, ValueError):
            return 1e10
        total = float(np.sum(lp))
        if not math.isfinite(total):
            return 1e10
        return -total / n

    return f, counter


def _grad_z(f, z, h=1e-6):
    g = np.empty(len(z))
    for i in range(len(z)):
        e = np.zeros(len(z))
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2.0 * h)
    return g


def _hessian(family: CopulaFamily, s: PseudoSample, x: list[float], bounds) -> np.ndarray:
    """Central-difference Hessian of the log-likelihood in parameter space."""
    k = len(x)
    steps = []
    for xi, b in zip(x, bounds):
        h = 1e-4 * (1.0 + abs(xi))
        lo, hi = b.box
        room = min(xi - lo, hi - xi)
        if room > 0:
            h = min(h, 0.5 * room)
        steps.append(h)

    def ll(y):
        p = _pack(family, y)
        return float(np.sum(_raw_logpdf(family, p, s.u, s.v)))

    H = np.empty((k, k))
    f0 = ll(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = steps[i]
        H[i, i] = (ll(x + ei) - 2.0 * f0 + ll(x - ei)) / steps[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = steps[j]
            val = (ll(x + ei + ej) - ll(x + ei - ej) - ll(x - ei + ej) + ll(x - ei - ej)) / (
                4.0 * steps[i] * steps[j]
            )
            H[i, j] = H[j, i] = val
    return 0.5 * (H + H.T)


def _confidence(family, s, x, bounds) -> tuple[tuple[float, float], ...]:
    x = np.asarray(x, dtype=float)
    try:
        H = _hessian(family, s, x, bounds)
        if not np.all(np.isfinite(H)):
            raise np.linalg.LinAlgError
        cov = np.linalg.inv(-H)
        var = np.diag(cov)
    except (np.linalg.LinAlgError, CopulaError, FloatingPointError, ValueError):
        var = np.full(len(x), np.nan)
    out = []
    for xi, vi, b in zip(x, var, bounds):
        lo, hi = b.box
        if np.isfinite(vi) and vi >= 0.0:
            half = Z_CRIT * math.sqrt(vi)
            out.append((float(max(xi - half, lo)), float(min(xi + half, hi))))
        else:
            # information matrix not invertible: report the whole admissible range
            out.append((float(lo), float(hi)))
    return tuple(out)


def fit_mle(family: CopulaFamily, s: PseudoSample, start: Optional[CopulaParams] = None) -> FitResult:
    """Maximize the copula log-likelihood over the family's parameter box.

    Quasi-Newton (L-BFGS-B) runs in unconstrained coordinates from a
    Kendall's-tau start; Nelder-Mead is the fallback. Non-convergence is
    reported through ``converged`` with the best parameters found.
    """
    if s.n < 30:
        raise DataError(f"need at least 30 pairs to fit, got {s.n}")
    bounds = _BOUNDS[family.kind]
    f, counter = _objective(family, s, bounds)
    z_box = [(b.z_lo, b.z_hi) for b in bounds]
    if start is not None:
        check_params(family, start)
        starts = [_unpack(family, start)]
    else:
        starts = _start_points(family, sample_kendall_tau(s))

    best = None
    for x0 in starts:
        z0 = np.array([b.to_z(xi) for b, xi in zip(bounds, x0)])
        res = optimize.minimize(
            f, z0, method="L-BFGS-B", bounds=z_box,
            options={"ftol": 1e-13, "gtol": 1e-7, "maxiter": 500, "eps": 1e-7},
        )
        ok = bool(res.success)
        if not ok or not np.isfinite(res.fun) or res.fun >= 1e9:
            nm = optimize.minimize(
                f, res.x if np.isfinite(res.fun) and res.fun < 1e9 else z0, method="Nelder-Mead",
                options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 4000},
            )
            if nm.fun <= res.fun:
                res, ok = nm, bool(nm.success)
        if best is None or res.fun < best[0].fun:
            best = (res, ok)

    res, ok = best
    z = np.clip(np.asarray(res.x, dtype=float), [a for a, _ in z_box], [b for _, b in z_box])
    x = [b.to_param(float(zi)) for b, zi in zip(bounds, z)]
    params = _pack(family, x)

    # gradient in parameter space, interior coordinates only
    if ok:
        g = _grad_z(f, z)
        interior = [(zi > lo + 1e-6) and (zi < hi - 1e-6) for zi, (lo, hi) in zip(z, z_box)]
        g = np.where(interior, g, 0.0)
        ok = bool(np.linalg.norm(g) < 1e-3)

    try:
        loglik = log_likelihood(family, params, s)
    except DensityOverflowError:
        loglik, ok = -math.inf, False
    aic, bic = information_criteria(loglik, family.n_params, s.n)
    try:
        tau = kendall_tau_from_params(family, params)
    except ConvergenceError:
        tau = math.nan
    return FitResult(
        family=family,
        params=params,
        ci=_confidence(family, s, x, bounds),
        loglik=loglik,
        aic=aic,
        bic=bic,
        tau=tau,
        tails=tail_dependence(family, params),
        n=s.n,
        converged=ok,
        message=str(getattr(res, "message", "")),
        n_evals=counter[0],
    )
