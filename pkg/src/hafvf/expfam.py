"""Conjugate exponential families and the mixing-prior arithmetic.

Every conjugate prior is stored as :class:`NaturalParams`: a vector ``xi`` of
statistic accumulators and a scalar ``eta`` counting effective observations.
The pair is an affine reparameterization of the prior's natural parameters,
so the geometric mixture ``p_prev**w * p_0**(1-w)`` (renormalized) is the
componentwise linear mix of the stored pairs. A single observation adds its
sufficient statistic to ``xi`` and one to ``eta``.

Each family also fixes a *chart*: the flat coordinate vector in which
``mean_params`` (the gradient of the log-partition ``B``) is reported.

============  ===========================================  ==========
family        xi                                           eta
============  ===========================================  ==========
BernoulliBeta ``[a]``                                      ``a + b``
GaussianNIG   ``[kappa*mu (n), 2b + kappa*mu**2 (n), nu]`` ``kappa``
GaussianNIW   ``[kappa*mu (d), Lambda + kappa*mu mu^T, nu]`` ``kappa``
LinRegNIG     ``[P (p*p), P m (p), 2b + m^T P m]``         ``nu``
============  ===========================================  ==========

``nu`` is twice the inverse-gamma shape for the NIG families and the
inverse-Wishart degrees of freedom for NIW.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy import special as sp

from . import special
from ._jet import Jet, logdet
from .errors import ConfigError, DomainError, InputError

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class NaturalParams:
    """Conjugate-prior parameters split into accumulators ``xi`` and count ``eta``."""

    xi: np.ndarray
    eta: float

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float).ravel()
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def flat(self) -> np.ndarray:
        return np.append(self.xi, self.eta)

    def __sub__(self, other: "NaturalParams") -> "NaturalParams":
        _check_same_shape(self, other)
        return NaturalParams(self.xi - other.xi, self.eta - other.eta)

    def __add__(self, other: "NaturalParams") -> "NaturalParams":
        _check_same_shape(self, other)
        return NaturalParams(self.xi + other.xi, self.eta + other.eta)

    def scaled(self, factor: float) -> "NaturalParams":
        return NaturalParams(self.xi * factor, self.eta * factor)

    def max_abs_diff(self, other: "NaturalParams") -> float:
        _check_same_shape(self, other)
        return float(max(np.max(np.abs(self.xi - other.xi), initial=0.0), abs(self.eta - other.eta)))

    def __repr__(self):
        return f"NaturalParams(xi={self.xi.tolist()}, eta={self.eta})"


@dataclass(frozen=True, eq=False)
class SufficientStats:
    """Summed sufficient statistic ``t`` of ``count`` observations (one time step)."""

    t: np.ndarray
    count: int = 1

    def __post_init__(self):
        t = np.array(self.t, dtype=float).ravel()
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        if int(self.count) < 1:
            raise InputError(f"sufficient statistics need count >= 1, got {self.count}")
        object.__setattr__(self, "count", int(self.count))


def _check_same_shape(a: NaturalParams, b: NaturalParams):
    if a.xi.shape != b.xi.shape:
        raise ConfigError(f"natural parameter shapes differ: {a.xi.shape} vs {b.xi.shape}")


# ---------------------------------------------------------------------------
# family-agnostic operations
# ---------------------------------------------------------------------------


def weighted_prior(theta_prev: NaturalParams, theta_0: NaturalParams, w_hat: float) -> NaturalParams:
    """``w * theta_prev + (1 - w) * theta_0``, componentwise.

    Written as ``theta_0 + w * (theta_prev - theta_0)`` so that equal inputs
    reproduce ``theta_0`` bit for bit.
    """
    _check_same_shape(theta_prev, theta_0)
    if not 0.0 <= w_hat <= 1.0:
        raise DomainError(f"mixing weight must lie in [0, 1], got {w_hat}")
    return NaturalParams(
        theta_0.xi + w_hat * (theta_prev.xi - theta_0.xi),
        theta_0.eta + w_hat * (theta_prev.eta - theta_0.eta),
    )


def update_theta(vartheta_hat: NaturalParams, stats: SufficientStats) -> NaturalParams:
    """Conjugate data update: add the statistics to ``xi`` and the count to ``eta``."""
    if stats.t.shape != vartheta_hat.xi.shape:
        raise InputError(
            f"statistic dimension {stats.t.shape[0]} does not match parameters {vartheta_hat.xi.shape[0]}"
        )
    return NaturalParams(vartheta_hat.xi + stats.t, vartheta_hat.eta + stats.count)


def rl_view(
    theta_prev: NaturalParams,
    w_hat: float,
    stats: SufficientStats,
    theta_0: NaturalParams | None = None,
) -> tuple[np.ndarray, float]:
    """Read the conjugate update as an incremental value update.

    Returns ``(Q, alpha)`` with ``Q = xi_prev / eta_prev`` and
    ``alpha = 1 / (eta_hat + 1)``, where ``eta_hat`` is the count of the
    weighted prior. ``theta_0=None`` takes the zero-prior limit; then
    ``Q + alpha * (T(x) - Q)`` equals the posterior ratio
    ``(xi_hat + T(x)) / (eta_hat + 1)``.
    """
    if theta_prev.eta == 0.0:
        raise DomainError("rl_view is undefined for a zero effective count")
    if stats.count != 1:
        raise InputError("rl_view expects a single observation")
    if theta_0 is None:
        theta_0 = NaturalParams(np.zeros_like(theta_prev.xi), 0.0)
    hat = weighted_prior(theta_prev, theta_0, w_hat)
    return theta_prev.xi / theta_prev.eta, 1.0 / (hat.eta + 1.0)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


class Family(ABC):
    """Interface of a conjugate exponential family.

    Subclasses implement the log-partition as a :class:`Jet` along a
    direction in ``(xi, eta)`` space; values and exact first to third
    derivatives along mixing segments all come from that one routine.
    """

    name: str = "family"

    @property
    @abstractmethod
    def xi_dim(self) -> int: ...

    @abstractmethod
    def _log_partition_jet(self, theta: NaturalParams, direction: NaturalParams | None) -> Jet: ...

    @abstractmethod
    def mean_params(self, theta: NaturalParams) -> np.ndarray:
        """Gradient of ``B`` in chart coordinates: ``E[T(z)]`` under the prior."""

    @abstractmethod
    def suff_stats(self, x: Any) -> SufficientStats: ...

    @abstractmethod
    def log_base_measure(self, x: Any) -> float: ...

    @abstractmethod
    def check_valid(self, theta: NaturalParams) -> None:
        """Raise :class:`DomainError` if ``theta`` is not a proper prior."""

    @abstractmethod
    def summary(self, theta: NaturalParams) -> dict[str, Any]:
        """Flattened posterior summary for reporting."""

    def chart(self, theta: NaturalParams) -> np.ndarray:
        """Chart coordinates of ``theta``; identity layout unless overridden."""
        return theta.flat

    def from_chart(self, c: Sequence[float]) -> NaturalParams:
        c = np.asarray(c, dtype=float)
        return NaturalParams(c[:-1], c[-1])

    def chart_direction(self, delta: NaturalParams) -> np.ndarray:
        """Linear part of the chart map applied to a parameter difference."""
        return self.chart(delta) - self.chart(NaturalParams(np.zeros_like(delta.xi), 0.0))

    def is_valid(self, theta: NaturalParams) -> bool:
        try:
            self.check_valid(theta)
        except (DomainError, np.linalg.LinAlgError):
            return False
        return True

    def _shape_check(self, theta: NaturalParams):
        if theta.xi.shape != (self.xi_dim,):
            raise ConfigError(
                f"{self.name}: expected xi of length {self.xi_dim}, got {theta.xi.shape[0]}"
            )

    def log_partition(self, theta: NaturalParams) -> float:
        self.check_valid(theta)
        return self._log_partition_value(theta)

    def _log_partition_value(self, theta: NaturalParams) -> float:
        """Value of ``B`` alone; families override this with a direct formula."""
        return float(self._log_partition_jet(theta, None).v)

    def directional_derivs(
        self, theta: NaturalParams, direction: NaturalParams, check: bool = True
    ) -> tuple[float, float, float]:
        """First three derivatives of ``s -> B(theta + s * direction)`` at ``s = 0``.

        ``check=False`` skips validation; callers use it on mixtures of valid
        parameters, which stay valid because every domain here is convex.
        """
        if check:
            self.check_valid(theta)
            self._shape_check(direction)
        jet = self._log_partition_jet(theta, direction)
        return float(jet.d1), float(jet.d2), float(jet.d3)

    def b_directional_derivs(
        self, theta_prev: NaturalParams, theta_0: NaturalParams, w_hat: float
    ) -> tuple[float, float, float]:
        """Derivatives of ``g(w) = B(w * theta_prev + (1 - w) * theta_0)`` at ``w_hat``."""
        return self.directional_derivs(weighted_prior(theta_prev, theta_0, w_hat), theta_prev - theta_0)

    def suff_stats_batch(self, xs: Sequence[Any]) -> SufficientStats:
        """Summed statistics of ``J = len(xs)`` observations made at one time step."""
        if len(xs) == 0:
            raise InputError("empty batch")
        total = sum(self.suff_stats(x).t for x in xs)
        return SufficientStats(total, len(xs))

    def log_predictive(self, theta: NaturalParams, x: Any) -> float:
        """Log posterior-predictive density (or mass) of one observation."""
        stats = self.suff_stats(x)
        return (
            self.log_partition(update_theta(theta, stats))
            - self.log_partition(theta)
            + self.log_base_measure(x)
        )

    def update(self, theta: NaturalParams, x: Any) -> NaturalParams:
        return update_theta(theta, self.suff_stats(x))


def _as_float(x, what="observation") -> float:
    try:
        value = float(x)
    except (TypeError, ValueError):
        raise InputError(f"{what} must be a real number, got {x!r}") from None
    if not math.isfinite(value):
        raise InputError(f"{what} must be finite, got {x!r}")
    return value


def _as_vector(x, dim, what="observation") -> np.ndarray:
    try:
        arr = np.asarray(x, dtype=float).ravel()
    except (TypeError, ValueError):
        raise InputError(f"{what} must be a numeric vector, got {x!r}") from None
    if arr.shape != (dim,):
        raise InputError(f"{what} must have dimension {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what} must be finite")
    return arr


class BernoulliBeta(Family):
    """Bernoulli likelihood with a Beta(a, b) prior on the success probability.

    The chart is ``(a, b)`` with statistics ``(log z, log(1 - z))``, so
    ``B`` is the log-Beta function.
    """

    name = "bernoulli"

    @property
    def xi_dim(self) -> int:
        return 1

    def params(self, alpha: float, beta: float) -> NaturalParams:
        theta = NaturalParams([alpha], alpha + beta)
        self.check_valid(theta)
        return theta

    def pseudo_counts(self, theta: NaturalParams) -> tuple[float, float]:
        a = float(theta.xi[0])
        return a, theta.eta - a

    def check_valid(self, theta):
        self._shape_check(theta)
        a, b = self.pseudo_counts(theta)
        if not (a > 0.0 and b > 0.0 and math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"Beta pseudo-counts must be positive, got ({a}, {b})")

    def chart(self, theta):
        a, b = self.pseudo_counts(theta)
        return np.array([a, b])

    def from_chart(self, c):
        return NaturalParams([c[0]], c[0] + c[1])

    def _log_partition_jet(self, theta, direction):
        a, b = self.pseudo_counts(theta)
        x = np.array([a, b, a + b])
        if direction is None:
            return Jet(float(sp.gammaln(a) + sp.gammaln(b) - sp.gammaln(a + b)))
        da = float(direction.xi[0])
        db = direction.eta - da
        d = np.array([da, db, da + db])
        sign = np.array([1.0, 1.0, -1.0])
        v = float(np.dot(sign, sp.gammaln(x)))
        d1 = float(np.dot(sign, sp.psi(x) * d))
        d2 = float(np.dot(sign, sp.zeta(2.0, x) * d * d))
        d3 = float(np.dot(sign, -2.0 * sp.zeta(3.0, x) * d * d * d))
        return Jet(v, d1, d2, d3)

    def mean_params(self, theta):
        self.check_valid(theta)
        a, b = self.pseudo_counts(theta)
        dab = special.digamma(a + b)
        return np.array([special.digamma(a) - dab, special.digamma(b) - dab])

    def suff_stats(self, x):
        value = _as_float(x)
        if value not in (0.0, 1.0):
            raise InputError(f"binary observation must be 0 or 1, got {x!r}")
        return SufficientStats([value], 1)

    def log_base_measure(self, x):
        return 0.0

    def summary(self, theta):
        a, b = self.pseudo_counts(theta)
        return {"alpha": a, "beta": b, "mean": a / (a + b)}


class GaussianNIG(Family):
    """Gaussian observations with unknown mean and variance (Normal-Inverse-Gamma).

    ``dim`` independent coordinates share the counts ``kappa`` and ``nu``;
    ``B`` is the sum of the per-coordinate normalizers. Chart statistics are
    ``(mu/s2, -1/(2 s2), -1/2 log s2, -mu^2/(2 s2))`` per coordinate, with the
    two count coordinates summed over coordinates.
    """

    name = "nig"

    def __init__(self, dim: int = 1):
        if dim < 1:
            raise ConfigError("dimension must be >= 1")
        self.dim = int(dim)

    @property
    def xi_dim(self) -> int:
        return 2 * self.dim + 1

    def params(self, mu=0.0, kappa=1.0, a=1.0, b=1.0) -> NaturalParams:
        n = self.dim
        mu = np.broadcast_to(np.asarray(mu, dtype=float), (n,))
        b = np.broadcast_to(np.asarray(b, dtype=float), (n,))
        if kappa <= 0 or a <= 0 or np.any(b <= 0):
            raise ConfigError(f"NIG needs kappa > 0, a > 0, b > 0 (got {kappa}, {a}, {np.min(b)})")
        theta = NaturalParams(np.concatenate([kappa * mu, 2.0 * b + kappa * mu**2, [2.0 * a]]), kappa)
        self.check_valid(theta)
        return theta

    def _split(self, theta):
        n = self.dim
        xi = theta.xi
        return xi[:n], xi[n : 2 * n], xi[2 * n], theta.eta

    def standard(self, theta) -> dict[str, Any]:
        s1, s2, nu, kappa = self._split(theta)
        mu = s1 / kappa
        return {"mu": mu, "kappa": kappa, "a": 0.5 * nu, "b": 0.5 * (s2 - s1 * mu)}

    def check_valid(self, theta):
        self._shape_check(theta)
        s1, s2, nu, kappa = self._split(theta)
        if not (kappa > 0.0 and nu > 0.0):
            raise DomainError(f"NIG needs kappa > 0 and nu > 0, got ({kappa}, {nu})")
        b = 0.5 * (s2 - s1 * s1 / kappa)
        if not np.all(b > 0.0) or not np.all(np.isfinite(b)):
            raise DomainError("NIG scale parameter must be positive")

    def _log_partition_jet(self, theta, direction):
        s1, s2, nu, kappa = self._split(theta)
        if direction is None:
            ds1 = ds2 = np.zeros(self.dim)
            dnu = dkappa = 0.0
        else:
            ds1, ds2, dnu, dkappa = self._split(direction)
        s1j = Jet.line(s1, ds1)
        s2j = Jet.line(s2, ds2)
        nuj = Jet.line(nu, dnu)
        kj = Jet.line(kappa, dkappa)
        aj = nuj * 0.5
        bj = (s2j - s1j * s1j / kj) * 0.5
        n = self.dim
        per_count = kj.log() * (-0.5 * n) + aj.lgamma() * n + 0.5 * n * LOG_2PI
        return per_count - aj * bj.log().sum()

    def _log_partition_value(self, theta):
        s1, s2, nu, kappa = self._split(theta)
        n, a = self.dim, 0.5 * nu
        b = 0.5 * (s2 - s1 * s1 / kappa)
        return float(0.5 * n * (LOG_2PI - math.log(kappa)) + n * sp.gammaln(a) - a * np.log(b).sum())

    def directional_derivs(self, theta, direction, check=True):
        # closed form of the jet above; this sits in the solver's inner loop
        if check:
            self.check_valid(theta)
            self._shape_check(direction)
        s1, s2, nu, kappa = self._split(theta)
        e1, e2, dnu, dk = self._split(direction)
        n = self.dim
        iv = 1.0 / kappa
        f0 = s1 * s1 * iv
        f1 = 2.0 * s1 * e1 * iv - s1 * s1 * dk * iv**2
        f2 = 2.0 * e1 * e1 * iv - 4.0 * s1 * e1 * dk * iv**2 + 2.0 * s1 * s1 * dk * dk * iv**3
        f3 = -6.0 * e1 * e1 * dk * iv**2 + 12.0 * s1 * e1 * dk * dk * iv**3 - 6.0 * s1 * s1 * dk**3 * iv**4
        b0 = 0.5 * (s2 - f0)
        b1, b2, b3 = 0.5 * (e2 - f1), -0.5 * f2, -0.5 * f3
        l1 = b1 / b0
        l2 = b2 / b0 - l1 * l1
        l3 = b3 / b0 - 3.0 * b1 * b2 / (b0 * b0) + 2.0 * l1**3
        a, da = 0.5 * nu, 0.5 * dnu
        lb, sl1, sl2, sl3 = np.log(b0).sum(), l1.sum(), l2.sum(), l3.sum()
        r = dk * iv
        p1 = float(sp.psi(a))
        p2, p3 = sp.zeta(np.array([2.0, 3.0]), a).tolist()
        d1 = -0.5 * n * r + n * p1 * da - (da * lb + a * sl1)
        d2 = 0.5 * n * r * r + n * p2 * da * da - (2.0 * da * sl1 + a * sl2)
        d3 = -n * r**3 - 2.0 * n * p3 * da**3 - (3.0 * da * sl2 + a * sl3)
        return float(d1), float(d2), float(d3)

    def mean_params(self, theta):
        self.check_valid(theta)
        p = self.standard(theta)
        mu, kappa, a, b = p["mu"], p["kappa"], p["a"], p["b"]
        prec = a / b
        e_log_var = np.log(b) - special.digamma(a)
        return np.concatenate(
            [
                prec * mu,
                -0.5 * prec,
                [-0.5 * np.sum(e_log_var)],
                [-0.5 * np.sum(1.0 / kappa + prec * mu * mu)],
            ]
        )

    def suff_stats(self, x):
        v = _as_vector(x, self.dim)
        return SufficientStats(np.concatenate([v, v * v, [1.0]]), 1)

    def log_base_measure(self, x):
        return -0.5 * self.dim * LOG_2PI

    def summary(self, theta):
        p = self.standard(theta)
        a = p["a"]
        var = p["b"] / (a - 1.0) if a > 1.0 else np.full(self.dim, math.inf)
        return {
            "mean": p["mu"].tolist(),
            "var_mean": np.asarray(var).tolist(),
            "kappa": p["kappa"],
            "a": a,
            "b": p["b"].tolist(),
        }


class GaussianNIW(Family):
    """Multivariate Gaussian with unknown mean and covariance (Normal-Inverse-Wishart)."""

    name = "niw"

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigError("dimension must be >= 1")
        self.dim = int(dim)

    @property
    def xi_dim(self) -> int:
        return self.dim + self.dim * self.dim + 1

    def params(self, mu=0.0, kappa=1.0, dof=None, scale=1.0) -> NaturalParams:
        d = self.dim
        mu = np.broadcast_to(np.asarray(mu, dtype=float), (d,))
        dof = d + 1.0 if dof is None else float(dof)
        scale = np.asarray(scale, dtype=float)
        if scale.ndim == 0:
            scale = float(scale) * np.eye(d)
        if scale.shape != (d, d):
            raise ConfigError(f"NIW scale matrix must be {d}x{d}")
        if kappa <= 0:
            raise ConfigError(f"NIW needs kappa > 0, got {kappa}")
        if dof <= d - 1:
            raise ConfigError(f"NIW needs dof > d - 1 = {d - 1}, got {dof}")
        s2 = scale + kappa * np.outer(mu, mu)
        theta = NaturalParams(np.concatenate([kappa * mu, s2.ravel(), [dof]]), kappa)
        self.check_valid(theta)
        return theta

    def _split(self, theta):
        d = self.dim
        xi = theta.xi
        return xi[:d], xi[d : d + d * d].reshape(d, d), xi[-1], theta.eta

    def standard(self, theta) -> dict[str, Any]:
        s1, s2, nu, kappa = self._split(theta)
        mu = s1 / kappa
        scale = s2 - np.outer(s1, s1) / kappa
        return {"mu": mu, "kappa": kappa, "dof": nu, "scale": 0.5 * (scale + scale.T)}

    def check_valid(self, theta):
        self._shape_check(theta)
        s1, s2, nu, kappa = self._split(theta)
        if not (kappa > 0.0 and nu > self.dim - 1):
            raise DomainError(f"NIW needs kappa > 0 and dof > d - 1, got ({kappa}, {nu})")
        scale = self.standard(theta)["scale"]
        if not np.all(np.isfinite(scale)):
            raise DomainError("NIW scale matrix is not finite")
        try:
            np.linalg.cholesky(scale)
        except np.linalg.LinAlgError:
            raise DomainError("NIW scale matrix is not positive definite") from None

    def _log_partition_jet(self, theta, direction):
        d = self.dim
        s1, s2, nu, kappa = self._split(theta)
        if direction is None:
            ds1, ds2, dnu, dkappa = np.zeros(d), np.zeros((d, d)), 0.0, 0.0
        else:
            ds1, ds2, dnu, dkappa = self._split(direction)
        kj = Jet.line(kappa, dkappa)
        nuj = Jet.line(nu, dnu)
        col = Jet.line(s1[:, None], ds1[:, None])
        row = Jet.line(s1[None, :], ds1[None, :])
        scale = Jet.line(s2, ds2) - col * row / kj
        half = nuj * 0.5 - 0.5 * np.arange(d)
        lmvg = half.lgamma().sum() + 0.25 * d * (d - 1) * math.log(math.pi)
        return (
            0.5 * d * LOG_2PI
            - kj.log() * (0.5 * d)
            + nuj * (0.5 * d * math.log(2.0))
            + lmvg
            - nuj * 0.5 * logdet(scale)
        )

    def _log_partition_value(self, theta):
        d = self.dim
        p = self.standard(theta)
        nu = p["dof"]
        _, ld = np.linalg.slogdet(p["scale"])
        return float(
            0.5 * d * (LOG_2PI - math.log(p["kappa"])) + 0.5 * nu * d * math.log(2.0)
            + special.log_multivariate_gamma(0.5 * nu, d) - 0.5 * nu * ld
        )

    def mean_params(self, theta):
        self.check_valid(theta)
        d = self.dim
        p = self.standard(theta)
        mu, kappa, nu, scale = p["mu"], p["kappa"], p["dof"], p["scale"]
        e_prec = nu * np.linalg.inv(scale)
        _, ld = np.linalg.slogdet(scale)
        e_logdet = ld - d * math.log(2.0) - special.multivariate_digamma(0.5 * nu, d)
        return np.concatenate(
            [
                e_prec @ mu,
                (-0.5 * e_prec).ravel(),
                [-0.5 * e_logdet],
                [-0.5 * (d / kappa + mu @ e_prec @ mu)],
            ]
        )

    def suff_stats(self, x):
        v = _as_vector(x, self.dim)
        return SufficientStats(np.concatenate([v, np.outer(v, v).ravel(), [1.0]]), 1)

    def log_base_measure(self, x):
        return -0.5 * self.dim * LOG_2PI

    def summary(self, theta):
        p = self.standard(theta)
        d = self.dim
        nu = p["dof"]
        cov = p["scale"] / (nu - d - 1.0) if nu > d + 1 else np.full((d, d), math.inf)
        return {
            "mean": p["mu"].tolist(),
            "cov_mean": cov.ravel().tolist(),
            "kappa": p["kappa"],
            "dof": nu,
        }


class LinRegNIG(Family):
    """Bayesian linear regression ``y = u . beta + noise`` with a NIG prior over
    ``(beta, noise variance)``. Observations are ``(u, y)`` pairs."""

    name = "linreg"

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigError("regressor dimension must be >= 1")
        self.dim = int(dim)

    @property
    def xi_dim(self) -> int:
        p = self.dim
        return p * p + p + 1

    def params(self, mean=0.0, precision=1.0, a=1.0, b=1.0) -> NaturalParams:
        p = self.dim
        mean = np.broadcast_to(np.asarray(mean, dtype=float), (p,))
        prec = np.asarray(precision, dtype=float)
        if prec.ndim == 0:
            prec = float(prec) * np.eye(p)
        if prec.shape != (p, p):
            raise ConfigError(f"precision matrix must be {p}x{p}")
        if a <= 0 or b <= 0:
            raise ConfigError(f"inverse-gamma needs a > 0 and b > 0, got ({a}, {b})")
        s = prec @ mean
        theta = NaturalParams(np.concatenate([prec.ravel(), s, [2.0 * b + mean @ s]]), 2.0 * a)
        self.check_valid(theta)
        return theta

    def _split(self, theta):
        p = self.dim
        xi = theta.xi
        return xi[: p * p].reshape(p, p), xi[p * p : p * p + p], xi[-1], theta.eta

    def standard(self, theta) -> dict[str, Any]:
        prec, s, syy, nu = self._split(theta)
        prec = 0.5 * (prec + prec.T)
        mean = np.linalg.solve(prec, s)
        return {"mean": mean, "precision": prec, "a": 0.5 * nu, "b": 0.5 * (syy - s @ mean)}

    def check_valid(self, theta):
        self._shape_check(theta)
        prec, s, syy, nu = self._split(theta)
        if not nu > 0.0:
            raise DomainError(f"count must be positive, got {nu}")
        try:
            np.linalg.cholesky(0.5 * (prec + prec.T))
        except np.linalg.LinAlgError:
            raise DomainError("precision matrix is not positive definite") from None
        b = self.standard(theta)["b"]
        if not (b > 0.0 and math.isfinite(b)):
            raise DomainError(f"noise scale must be positive, got {b}")

    def _log_partition_jet(self, theta, direction):
        p = self.dim
        prec, s, syy, nu = self._split(theta)
        if direction is None:
            dprec, ds, dsyy, dnu = np.zeros((p, p)), np.zeros(p), 0.0, 0.0
        else:
            dprec, ds, dsyy, dnu = self._split(direction)
        pj = Jet.line(prec, dprec)
        # quadratic form s^T P^{-1} s along the line, via x = P^{-1} s
        p0 = prec
        x0 = np.linalg.solve(p0, s)
        # derivatives of x(w) = P(w)^{-1} s(w): P x' = s' - P' x, P x'' = -2 P' x', P x''' = -3 P' x''
        x1 = np.linalg.solve(p0, ds - dprec @ x0)
        x2 = np.linalg.solve(p0, -2.0 * dprec @ x1)
        x3 = np.linalg.solve(p0, -3.0 * dprec @ x2)
        # q = s . x ; s'' = 0
        q = Jet(s @ x0, ds @ x0 + s @ x1, 2.0 * ds @ x1 + s @ x2, 3.0 * ds @ x2 + s @ x3)
        bj = (Jet.line(syy, dsyy) - q) * 0.5
        aj = Jet.line(nu, dnu) * 0.5
        return 0.5 * p * LOG_2PI - 0.5 * logdet(pj) + aj.lgamma() - aj * bj.log()

    def _log_partition_value(self, theta):
        st = self.standard(theta)
        a = st["a"]
        _, ld = np.linalg.slogdet(st["precision"])
        return float(0.5 * self.dim * LOG_2PI - 0.5 * ld + sp.gammaln(a) - a * math.log(st["b"]))

    def mean_params(self, theta):
        self.check_valid(theta)
        st = self.standard(theta)
        mean, prec, a, b = st["mean"], st["precision"], st["a"], st["b"]
        e_noise_prec = a / b
        cov_unit = np.linalg.inv(prec)
        return np.concatenate(
            [
                (-0.5 * (cov_unit + e_noise_prec * np.outer(mean, mean))).ravel(),
                e_noise_prec * mean,
                [-0.5 * e_noise_prec],
                [-0.5 * (math.log(b) - special.digamma(a))],
            ]
        )

    def suff_stats(self, x):
        try:
            u, y = x
        except (TypeError, ValueError):
            raise InputError(f"regression observation must be a (regressors, response) pair, got {x!r}") from None
        u = _as_vector(u, self.dim, "regressor")
        y = _as_float(y, "response")
        return SufficientStats(np.concatenate([np.outer(u, u).ravel(), u * y, [y * y]]), 1)

    def log_base_measure(self, x):
        return -0.5 * LOG_2PI

    def summary(self, theta):
        st = self.standard(theta)
        a, b = st["a"], st["b"]
        noise = b / (a - 1.0) if a > 1.0 else math.inf
        cov = np.linalg.inv(st["precision"]) * (noise if math.isfinite(noise) else b / a)
        return {
            "coef_mean": st["mean"].tolist(),
            "coef_sd": np.sqrt(np.diag(cov)).tolist(),
            "noise_var_mean": noise,
            "a": a,
            "b": b,
        }


FAMILIES = {
    "bernoulli": BernoulliBeta,
    "nig": GaussianNIG,
    "niw": GaussianNIW,
    "linreg": LinRegNIG,
}


def make_family(name: str, dim: int | None = None) -> Family:
    """Build a family by name; ``dim`` is required for ``niw`` and ``linreg``."""
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise ConfigError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    if cls is BernoulliBeta:
        return cls()
    if dim is None:
        if cls is GaussianNIG:
            return cls()
        raise ConfigError(f"family {name!r} needs a dimension")
    return cls(dim)
