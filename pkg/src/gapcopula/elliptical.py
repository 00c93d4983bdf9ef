"""Gaussian and Student-t copulas."""

from __future__ import annotations

import numpy as np
from scipy import special

from .bvn import bvn_cdf, bvt_copula_cdf


class Gaussian:
    name = "gaussian"

    def cdf(self, u, v, rho, nu=None):
        return bvn_cdf(special.ndtri(u), special.ndtri(v), rho)

    def logpdf(self, u, v, rho, nu=None):
        x, y = special.ndtri(u), special.ndtri(v)
        r2 = 1.0 - rho * rho
        return -0.5 * np.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)

    def h(self, u, v, rho, nu=None):
        x, y = special.ndtri(u), special.ndtri(v)
        return special.ndtr((y - rho * x) / np.sqrt(1.0 - rho * rho))

    def hinv(self, u, q, rho, nu=None):
        x = special.ndtri(u)
        return special.ndtr(special.ndtri(q) * np.sqrt(1.0 - rho * rho) + rho * x)


class StudentT:
    name = "studentt"

    def cdf(self, u, v, rho, nu):
        return bvt_copula_cdf(u, v, rho, nu)

    def logpdf(self, u, v, rho, nu):
        x, y = special.stdtrit(nu, u), special.stdtrit(nu, v)
        r2 = 1.0 - rho * rho
        q = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2)
        const = (
            special.gammaln((nu + 2.0) / 2.0)
            + special.gammaln(nu / 2.0)
            - 2.0 * special.gammaln((nu + 1.0) / 2.0)
            - 0.5 * np.log(r2)
        )
        return (
            const
            - (nu + 2.0) / 2.0 * np.log1p(q)
            + (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
        )

    def _scale(self, x, rho, nu):
        return np.sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0))

    def h(self, u, v, rho, nu):
        x, y = special.stdtrit(nu, u), special.stdtrit(nu, v)
        return special.stdtr(nu + 1.0, (y - rho * x) / self._scale(x, rho, nu))

    def hinv(self, u, q, rho, nu):
        x = special.stdtrit(nu, u)
        y = special.stdtrit(nu + 1.0, q) * self._scale(x, rho, nu) + rho * x
        return special.stdtr(nu, y)
