"""Third-order forward-mode derivatives along a scalar direction.

A :class:`Jet` carries ``(f, f', f'', f''')`` of a quantity viewed as a
function of one scalar ``w``. Components may be floats or numpy arrays
(elementwise). Only the handful of operations the log-partition functions
need are implemented.
"""

from __future__ import annotations

import numpy as np
from scipy import special as sp


class Jet:
    __slots__ = ("v", "d1", "d2", "d3")

    def __init__(self, v, d1=0.0, d2=0.0, d3=0.0):
        self.v = v
        self.d1 = d1
        self.d2 = d2
        self.d3 = d3

    @classmethod
    def line(cls, value, slope):
        """The jet of ``value + (w - w0) * slope`` at ``w0``."""
        zero = np.zeros_like(value) if isinstance(value, np.ndarray) else 0.0
        return cls(value, slope, zero, zero)

    def derivs(self):
        return self.d1, self.d2, self.d3

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v + other.v, self.d1 + other.d1, self.d2 + other.d2, self.d3 + other.d3)
        return Jet(self.v + other, self.d1, self.d2, self.d3)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.d1, -self.d2, -self.d3)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.v * other, self.d1 * other, self.d2 * other, self.d3 * other)
        a, b = self, other
        return Jet(
            a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
            a.d3 * b.v + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.v * b.d3,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def compose(self, f0, f1, f2, f3):
        """Chain rule for ``phi(self)`` given phi and its first three derivatives
        evaluated at ``self.v``."""
        a1, a2, a3 = self.d1, self.d2, self.d3
        return Jet(
            f0,
            f1 * a1,
            f2 * a1 * a1 + f1 * a2,
            f3 * a1 * a1 * a1 + 3.0 * f2 * a1 * a2 + f1 * a3,
        )

    def reciprocal(self):
        r = 1.0 / self.v
        return self.compose(r, -r * r, 2.0 * r**3, -6.0 * r**4)

    def log(self):
        r = 1.0 / self.v
        return self.compose(np.log(self.v), r, -r * r, 2.0 * r**3)

    def lgamma(self):
        x = self.v
        return self.compose(sp.gammaln(x), sp.psi(x), sp.zeta(2.0, x), -2.0 * sp.zeta(3.0, x))

    def sum(self):
        return Jet(np.sum(self.v), np.sum(self.d1), np.sum(self.d2), np.sum(self.d3))


def logdet(m):
    """Jet of ``log det A(w)`` for a jet ``m`` whose components are square matrices."""
    a0 = m.v
    n = a0.shape[0]
    zero = np.zeros((n, n))
    a1, a2, a3 = (zero + d for d in m.derivs())
    sign, ld = np.linalg.slogdet(a0)
    x1 = np.linalg.solve(a0, a1)
    x2 = np.linalg.solve(a0, a2)
    x3 = np.linalg.solve(a0, a3)
    x11 = x1 @ x1
    d1 = np.trace(x1)
    d2 = np.trace(x2) - np.trace(x11)
    d3 = np.trace(x3) - 3.0 * np.trace(x1 @ x2) + 2.0 * np.trace(x11 @ x1)
    return Jet(ld if sign > 0 else np.nan, d1, d2, d3)
