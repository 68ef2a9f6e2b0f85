"""Special functions over the positive reals.

Thin, domain-checked wrappers around :mod:`scipy.special`. Every function
accepts a Python scalar or a numpy array and raises :class:`DomainError`
instead of returning NaN or infinity for arguments outside the domain.
"""

from __future__ import annotations

import math
from numbers import Real

import numpy as np
from scipy import special as sp

from .errors import DomainError

__all__ = [
    "log_gamma",
    "digamma",
    "trigamma",
    "tetragamma",
    "log_beta",
    "log_multivariate_gamma",
    "multivariate_digamma",
    "multivariate_trigamma",
]


def _positive(x, name):
    """Validate that ``x`` is finite and strictly positive; return it as float or array."""
    if isinstance(x, Real) and not isinstance(x, bool):
        x = float(x)
        if not (math.isfinite(x) and x > 0.0):
            raise DomainError(f"{name}: argument must be finite and > 0, got {x!r}")
        return x
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr) & (arr > 0.0)):
        bad = arr[~(np.isfinite(arr) & (arr > 0.0))].ravel()[0]
        raise DomainError(f"{name}: argument must be finite and > 0, got {bad!r}")
    return arr


def _out(value, like):
    if isinstance(like, float):
        return float(value)
    return value


def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    x = _positive(x, "log_gamma")
    return _out(sp.gammaln(x), x)


def digamma(x):
    """psi_0(x), the logarithmic derivative of Gamma."""
    x = _positive(x, "digamma")
    return _out(sp.psi(x), x)


def trigamma(x):
    """psi_1(x). Evaluated as the Hurwitz zeta(2, x), which is much cheaper than
    ``polygamma`` on scalars."""
    x = _positive(x, "trigamma")
    return _out(sp.zeta(2.0, x), x)


def tetragamma(x):
    """psi_2(x) = -2 zeta(3, x); used for third derivatives of log-Beta."""
    x = _positive(x, "tetragamma")
    return _out(-2.0 * sp.zeta(3.0, x), x)


def log_beta(a, b):
    """ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b)."""
    a = _positive(a, "log_beta")
    b = _positive(b, "log_beta")
    value = sp.betaln(a, b)
    return float(value) if isinstance(a, float) and isinstance(b, float) else value


def _check_mv(x, d, name):
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise DomainError(f"{name}: dimension must be a positive integer, got {d!r}")
    x = float(x)
    if not math.isfinite(x) or x <= 0.5 * (d - 1):
        raise DomainError(f"{name}: requires x > (d-1)/2 = {0.5 * (d - 1)}, got {x!r}")
    return x, np.arange(d, dtype=float)


def log_multivariate_gamma(x, d):
    """ln Gamma_d(x) = d(d-1)/4 ln(pi) + sum_j ln Gamma(x + (1-j)/2)."""
    x, j = _check_mv(x, d, "log_multivariate_gamma")
    return float(0.25 * d * (d - 1) * math.log(math.pi) + np.sum(sp.gammaln(x - 0.5 * j)))


def multivariate_digamma(x, d):
    """d/dx ln Gamma_d(x) = sum_j psi_0(x + (1-j)/2)."""
    x, j = _check_mv(x, d, "multivariate_digamma")
    return float(np.sum(sp.psi(x - 0.5 * j)))


def multivariate_trigamma(x, d):
    """d^2/dx^2 ln Gamma_d(x) = sum_j psi_1(x + (1-j)/2)."""
    x, j = _check_mv(x, d, "multivariate_trigamma")
    return float(np.sum(sp.zeta(2.0, x - 0.5 * j)))
