"""Generator-based one- and two-parameter Archimedean families.

Each family supplies its generator ``phi``, the inverse generator ``psi``,
and the logarithms of ``-phi'`` and ``phi''``. Distribution function, density
and h-function then follow generically:

    C(u, v) = psi(phi(u) + phi(v))
    h(u, v) = phi'(u) / phi'(C)
    c(u, v) = -phi''(C) phi'(u) phi'(v) / phi'(C)**3

Densities are assembled in log space so that large parameters do not
overflow intermediate powers; callers check the result for finiteness.
"""

from __future__ import annotations

import numpy as np


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


class Archimedean:
    """Base class; subclasses are stateless and parameters are passed in."""

    name = "archimedean"

    def phi(self, t, th, de):
        raise NotImplementedError

    def psi(self, s, th, de):
        raise NotImplementedError

    def log_neg_dphi(self, t, th, de):
        raise NotImplementedError

    def log_d2phi(self, t, th, de):
        raise NotImplementedError

    def cdf(self, u, v, th, de=None):
        with np.errstate(over="ignore", divide="ignore"):
            s = self.phi(u, th, de) + self.phi(v, th, de)
            c = self.psi(s, th, de)
        return np.clip(c, 0.0, np.minimum(u, v))

    def h(self, u, v, th, de=None):
        c = self.cdf(u, v, th, de)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = np.exp(self.log_neg_dphi(u, th, de) - self.log_neg_dphi(c, th, de))
        # C underflows to 0 only far in the lower tail, where h -> 0
        out = np.where(c > 0.0, out, 0.0)
        return np.clip(np.nan_to_num(out, nan=0.0), 0.0, 1.0)

    def logpdf(self, u, v, th, de=None):
        c = self.cdf(u, v, th, de)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = (
                self.log_d2phi(c, th, de)
                + self.log_neg_dphi(u, th, de)
                + self.log_neg_dphi(v, th, de)
                - 3.0 * self.log_neg_dphi(c, th, de)
            )
        return out

    def lambda_fn(self, t, th, de=None):
        """phi(t) / phi'(t), the lambda function of the Kendall distribution."""
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = -self.phi(t, th, de) * np.exp(-self.log_neg_dphi(t, th, de))
        return np.where(np.isfinite(out), out, 0.0)


class Clayton(Archimedean):
    name = "clayton"

    def phi(self, t, th, de):
        return np.expm1(-th * np.log(t)) / th

    def psi(self, s, th, de):
        return np.exp(-np.log1p(th * s) / th)

    def log_neg_dphi(self, t, th, de):
        return -(th + 1.0) * _log(t)

    def log_d2phi(self, t, th, de):
        return np.log1p(th) - (th + 2.0) * _log(t)


class Gumbel(Archimedean):
    name = "gumbel"

    def phi(self, t, th, de):
        return (-np.log(t)) ** th

    def psi(self, s, th, de):
        return np.exp(-(s ** (1.0 / th)))

    def log_neg_dphi(self, t, th, de):
        lt = -_log(t)
        return np.log(th) + (th - 1.0) * _log(lt) + lt

    def log_d2phi(self, t, th, de):
        lt = -_log(t)
        return np.log(th) + (th - 2.0) * _log(lt) + _log(th - 1.0 + lt) + 2.0 * lt


class Frank(Archimedean):
    name = "frank"

    def phi(self, t, th, de):
        return -np.log(np.expm1(-th * t) / np.expm1(-th))

    def psi(self, s, th, de):
        return -np.log1p(np.exp(-s) * np.expm1(-th)) / th

    def log_neg_dphi(self, t, th, de):
        return _log(th / np.expm1(th * t))

    def log_d2phi(self, t, th, de):
        return 2.0 * np.log(abs(th)) + th * t - 2.0 * _log(np.abs(np.expm1(th * t)))


class Joe(Archimedean):
    name = "joe"

    def phi(self, t, th, de):
        return -np.log1p(-((1.0 - t) ** th))

    def psi(self, s, th, de):
        return 1.0 - (-np.expm1(-s)) ** (1.0 / th)

    def log_neg_dphi(self, t, th, de):
        return np.log(th) + (th - 1.0) * np.log1p(-t) - np.log1p(-((1.0 - t) ** th))

    def log_d2phi(self, t, th, de):
        w = (1.0 - t) ** th
        return np.log(th) + (th - 2.0) * np.log1p(-t) + np.log(th - 1.0 + w) - 2.0 * np.log1p(-w)


class BB1(Archimedean):
    """Clayton-Gumbel: phi(t) = (t**-theta - 1)**delta."""

    name = "bb1"

    def phi(self, t, th, de):
        return np.expm1(-th * np.log(t)) ** de

    def psi(self, s, th, de):
        return np.exp(-np.log1p(s ** (1.0 / de)) / th)

    def log_neg_dphi(self, t, th, de):
        lt = _log(t)
        lx = _log(np.expm1(-th * lt))
        return np.log(de) + (de - 1.0) * lx + np.log(th) - (th + 1.0) * lt

    def log_d2phi(self, t, th, de):
        lt = _log(t)
        lx = _log(np.expm1(-th * lt))
        inner = (de - 1.0) * th + (th + 1.0) * (-np.expm1(th * lt))
        return np.log(de) + (de - 2.0) * lx + np.log(th) - (2.0 * th + 2.0) * lt + _log(inner)


class BB6(Archimedean):
    """Joe-Gumbel: phi(t) = (-log(1 - (1 - t)**theta))**delta."""

    name = "bb6"
    _joe = Joe()

    def phi(self, t, th, de):
        return self._joe.phi(t, th, None) ** de

    def psi(self, s, th, de):
        return 1.0 - (-np.expm1(-(s ** (1.0 / de)))) ** (1.0 / th)

    def log_neg_dphi(self, t, th, de):
        lx = _log(self._joe.phi(t, th, None))
        return np.log(de) + (de - 1.0) * lx + self._joe.log_neg_dphi(t, th, None)

    def log_d2phi(self, t, th, de):
        lx = _log(self._joe.phi(t, th, None))
        lg1 = self._joe.log_neg_dphi(t, th, None)
        lg2 = self._joe.log_d2phi(t, th, None)
        bracket = np.logaddexp(_log(de - 1.0) + 2.0 * lg1, lx + lg2)
        return np.log(de) + (de - 2.0) * lx + bracket


class BB7(Archimedean):
    """Joe-Clayton: phi(t) = (1 - (1 - t)**theta)**-delta - 1."""

    name = "bb7"

    @staticmethod
    def _lx(t, th):
        return _log(-np.expm1(th * np.log1p(-t)))

    def phi(self, t, th, de):
        return np.expm1(-de * self._lx(t, th))

    def psi(self, s, th, de):
        return 1.0 - (-np.expm1(-np.log1p(s) / de)) ** (1.0 / th)

    def log_neg_dphi(self, t, th, de):
        return np.log(de) - (de + 1.0) * self._lx(t, th) + np.log(th) + (th - 1.0) * np.log1p(-t)

    def log_d2phi(self, t, th, de):
        lx = self._lx(t, th)
        lg1 = np.log(th) + (th - 1.0) * np.log1p(-t)
        second = lx + _log(th * (th - 1.0)) + (th - 2.0) * np.log1p(-t)
        return np.log(de) + (-de - 2.0) * lx + np.logaddexp(np.log1p(de) + 2.0 * lg1, second)


class BB8(Archimedean):
    """Joe-Frank: phi(t) = -log((1 - (1 - delta t)**theta) / (1 - (1 - delta)**theta))."""

    name = "bb8"

    @staticmethod
    def _eta(th, de):
        return -np.expm1(th * np.log1p(-de))

    def phi(self, t, th, de):
        x = -np.expm1(th * np.log1p(-de * t))
        return -np.log(x / self._eta(th, de))

    def psi(self, s, th, de):
        return -np.expm1(np.log1p(-self._eta(th, de) * np.exp(-s)) / th) / de

    def log_neg_dphi(self, t, th, de):
        lx = _log(-np.expm1(th * np.log1p(-de * t)))
        return np.log(th * de) + (th - 1.0) * np.log1p(-de * t) - lx

    def log_d2phi(self, t, th, de):
        lx = _log(-np.expm1(th * np.log1p(-de * t)))
        lg1 = np.log(th * de) + (th - 1.0) * np.log1p(-de * t)
        second = lx + _log(th * (th - 1.0)) + 2.0 * np.log(de) + (th - 2.0) * np.log1p(-de * t)
        return np.logaddexp(2.0 * lg1, second) - 2.0 * lx
