"""Asymmetric logistic (Tawn) extreme-value copulas.

With x = -log u, y = -log v, s = x + y and t = y / s the copula is
C(u, v) = exp(-s A(t)) for a convex Pickands dependence function A. Both
types fix one asymmetry weight at one:

    type 1: A(t) = (1 - d)(1 - t) + ((d (1 - t))**th + t**th)**(1/th)
    type 2: A(t) = (1 - d) t + ((1 - t)**th + (d t)**th)**(1/th)
"""

from __future__ import annotations

import numpy as np


class Tawn:
    name = "tawn"

    def __init__(self, kind: int):
        if kind not in (1, 2):
            raise ValueError("Tawn type must be 1 or 2")
        self.kind = kind

    def _ab(self, t, de):
        """Linear arguments of the logistic part and the linear offset slope."""
        if self.kind == 1:
            return de * (1.0 - t), t, -de, 1.0, -(1.0 - de)
        return 1.0 - t, de * t, -1.0, de, 1.0 - de

    def pickands(self, t, th, de):
        """A(t), A'(t), A''(t)."""
        t = np.asarray(t, dtype=float)
        a, b, da, db, slope = self._ab(t, de)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            g = (a**th + b**th) ** (1.0 / th)
            dg = g ** (1.0 - th) * (a ** (th - 1.0) * da + b ** (th - 1.0) * db)
            # (a b' - a' b) equals delta for both types
            d2g = (th - 1.0) * g ** (1.0 - 2.0 * th) * (a * b) ** (th - 2.0) * de * de
        d2g = np.where(np.isfinite(d2g), d2g, 0.0)
        linear = (1.0 - de) * (1.0 - t) if self.kind == 1 else (1.0 - de) * t
        return linear + g, slope + dg, d2g

    def _parts(self, u, v, th, de):
        x, y = -np.log(u), -np.log(v)
        s = x + y
        t = y / s
        A, dA, d2A = self.pickands(t, th, de)
        lx = A - t * dA
        ly = A + (1.0 - t) * dA
        logc = -s * A
        return s, t, lx, ly, d2A, logc

    def cdf(self, u, v, th, de):
        *_, logc = self._parts(u, v, th, de)
        return np.exp(logc)

    def h(self, u, v, th, de):
        _, _, lx, _, _, logc = self._parts(u, v, th, de)
        return np.clip(np.exp(logc) * lx / u, 0.0, 1.0)

    def logpdf(self, u, v, th, de):
        s, t, lx, ly, d2A, logc = self._parts(u, v, th, de)
        with np.errstate(divide="ignore", invalid="ignore"):
            return logc - np.log(u) - np.log(v) + np.log(lx * ly + t * (1.0 - t) * d2A / s)
