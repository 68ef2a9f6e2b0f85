"""Beta-distributed forgetting factors and their non-conjugate update.

The prior over a lower-level variable ``z`` is the mix
``w * theta_prev + (1 - w) * theta_0`` of the previous posterior and a naive
prior. The posterior ``q(w) = Beta(alpha, beta)`` is fitted by a damped
fixed-point iteration of the non-conjugate message passing update

    alpha = alpha_hat + K(alpha, beta) (dL + dC) + dV_alpha
    beta  = beta_hat  - K(beta, alpha) (dL + dC) + dV_beta

where ``(alpha_hat, beta_hat)`` is the prior over ``w`` and the increments
come from a second-order expansion of ``E_q(w)[B(theta_hat(w))]`` around
``E[w]``. The same machinery serves the stability level ``b``, with ``w``
itself playing the role of the lower-level variable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from . import special
from .errors import ConfigError, NumericalError
from .expfam import BernoulliBeta, Family, NaturalParams, weighted_prior

log = logging.getLogger(__name__)

DET_FLOOR = 1e-12

_BETA = BernoulliBeta()


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (a > 0.0 and b > 0.0 and math.isfinite(a) and math.isfinite(b)):
            raise ConfigError(f"Beta parameters must be finite and positive, got ({a}, {b})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def natural(self) -> NaturalParams:
        """The same distribution as conjugate-prior parameters of :class:`BernoulliBeta`."""
        return NaturalParams([self.alpha], self.alpha + self.beta)

    @classmethod
    def from_natural(cls, theta: NaturalParams) -> "BetaParams":
        a = float(theta.xi[0])
        return cls(a, theta.eta - a)

    def max_abs_diff(self, other: "BetaParams") -> float:
        return max(abs(self.alpha - other.alpha), abs(self.beta - other.beta))

    def mix(self, base: "BetaParams", weight: float) -> "BetaParams":
        """``weight * (self - base) + base``: the forgetting-weighted prior."""
        return BetaParams(
            weight * (self.alpha - base.alpha) + base.alpha,
            weight * (self.beta - base.beta) + base.beta,
        )


@dataclass(frozen=True)
class ForgettingIncrements:
    """Per-update contributions to ``(alpha, beta)``.

    ``u1`` is driven by ``dL``, ``u2`` by ``dC`` and ``u3`` by ``dV``.
    """

    dL: float = 0.0
    dC: float = 0.0
    dV_alpha: float = 0.0
    dV_beta: float = 0.0
    u1_alpha: float = 0.0
    u1_beta: float = 0.0
    u2_alpha: float = 0.0
    u2_beta: float = 0.0
    u3_alpha: float = 0.0
    u3_beta: float = 0.0

    @property
    def total_alpha(self) -> float:
        return self.u1_alpha + self.u2_alpha + self.u3_alpha

    @property
    def total_beta(self) -> float:
        return self.u1_beta + self.u2_beta + self.u3_beta


ZERO_INCREMENTS = ForgettingIncrements()


@dataclass(frozen=True)
class NcvmpControls:
    max_iters: int = 100
    tol: float = 1e-6
    damping: float = 0.5
    reset_value: BetaParams = field(default_factory=lambda: BetaParams(10.0, 10.0))

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        if not 0.0 < self.damping <= 1.0:
            raise ConfigError(f"damping must lie in (0, 1], got {self.damping}")


@dataclass(frozen=True)
class NcvmpResult:
    phi: BetaParams
    increments: ForgettingIncrements
    iterations: int
    resets: int
    converged: bool


def beta_mean_var(phi: BetaParams) -> tuple[float, float]:
    a, b = phi.alpha, phi.beta
    s = a + b
    return a / s, a * b / (s * s * (s + 1.0))


def beta_var_grad(phi: BetaParams) -> tuple[float, float]:
    """Gradient of ``Var[w]`` with respect to ``(alpha, beta)``."""
    a, b = phi.alpha, phi.beta
    s = a + b
    den = s**3 * (s + 1.0) ** 2
    return (
        -b * (2 * a * a + a * b + a - b * b - b) / den,
        a * (a * a - a * b + a - 2 * b * b - b) / den,
    )


def _trigammas(phi: BetaParams) -> tuple[float, float, float]:
    # BetaParams is validated on construction, so skip the domain checks
    a, b = phi.alpha, phi.beta
    ta, tb, ts = sp.zeta(2.0, np.array([a, b, a + b])).tolist()
    return ta, tb, ts


def beta_stat_cov(phi: BetaParams) -> np.ndarray:
    """Covariance of ``(log w, log(1 - w))`` under ``Beta(alpha, beta)``."""
    ta, tb, ts = _trigammas(phi)
    return np.array([[ta - ts, -ts], [-ts, tb - ts]])


def compute_dL(q_mean: np.ndarray, prior_mean: np.ndarray, delta_theta: np.ndarray) -> float:
    """``(E_q[T] - E_prior[T]) . delta`` with all three vectors in chart coordinates."""
    q_mean = np.asarray(q_mean, dtype=float)
    prior_mean = np.asarray(prior_mean, dtype=float)
    delta_theta = np.asarray(delta_theta, dtype=float)
    if not (q_mean.shape == prior_mean.shape == delta_theta.shape):
        raise ConfigError(
            f"dimension mismatch in dL: {q_mean.shape}, {prior_mean.shape}, {delta_theta.shape}"
        )
    return float(np.dot(q_mean - prior_mean, delta_theta))


def compute_dC(var_w: float, d3: float) -> float:
    return -0.5 * var_w * d3


def compute_dV(phi: BetaParams, d2: float) -> tuple[float, float]:
    """``-d2/2 * S^{-1} grad Var[w]``, with ``S`` the Beta statistic covariance.

    Returns zeros (and logs a warning) when ``det S`` falls below the floor.
    """
    if d2 == 0.0:
        return 0.0, 0.0
    ta, tb, ts = _trigammas(phi)
    c00, c11, c01 = ta - ts, tb - ts, -ts
    det = c00 * c11 - c01 * c01
    if not det > DET_FLOOR:
        log.warning("Beta statistic covariance is ill-conditioned (det=%g); dV set to 0", det)
        return 0.0, 0.0
    ga, gb = beta_var_grad(phi)
    sa = (c11 * ga - c01 * gb) / det
    sb = (c00 * gb - c01 * ga) / det
    return -0.5 * d2 * sa, -0.5 * d2 * sb


def ncvmp_kernel(phi: BetaParams) -> tuple[float, float]:
    """``(K(alpha, beta), K(beta, alpha))`` of the fixed-point update.

    ``K(x, y) = (M x + L(y) y) / ((L(x) L(y) - M^2) (x + y)^2)`` with
    ``M = -psi_1(x + y)`` and ``L(x) = psi_1(x) + M``.
    """
    a, b = phi.alpha, phi.beta
    ta, tb, ts = _trigammas(phi)
    m = -ts
    la = ta + m
    lb = tb + m
    den = (la * lb - m * m) * (a + b) ** 2
    if not den > 0.0:
        raise NumericalError(f"kernel denominator underflow at ({a}, {b})")
    return (m * a + lb * b) / den, (m * b + la * a) / den


def compute_increments(
    family: Family,
    theta_prev: NaturalParams,
    theta_0: NaturalParams,
    theta_q: NaturalParams,
    phi: BetaParams,
) -> ForgettingIncrements:
    """All increments at the current ``phi``; see :func:`ncvmp_solve`."""
    delta = theta_prev - theta_0
    dq = family.directional_derivs(theta_q, delta)[0]
    return _increments(family, theta_prev, theta_0, delta, dq, phi)


def _increments(family, theta_prev, theta_0, delta, dq, phi):
    w_hat, var_w = beta_mean_var(phi)
    hat = weighted_prior(theta_prev, theta_0, w_hat)
    d1, d2, d3 = family.directional_derivs(hat, delta, check=False)
    d_l = dq - d1
    d_c = compute_dC(var_w, d3)
    dva, dvb = compute_dV(phi, d2)
    k_ab, k_ba = ncvmp_kernel(phi)
    return ForgettingIncrements(
        dL=d_l,
        dC=d_c,
        dV_alpha=dva,
        dV_beta=dvb,
        u1_alpha=k_ab * d_l,
        u1_beta=-k_ba * d_l,
        u2_alpha=k_ab * d_c,
        u2_beta=-k_ba * d_c,
        u3_alpha=dva,
        u3_beta=dvb,
    )


def update_phi(
    phi_weighted_prior: BetaParams,
    increments: ForgettingIncrements,
    phi_current: BetaParams,
    controls: NcvmpControls,
) -> tuple[BetaParams, bool]:
    """One damped fixed-point step.

    Falls back to ``controls.reset_value`` (flag ``True``) when the undamped
    target leaves the positive quadrant or is not finite.
    """
    ra = phi_weighted_prior.alpha + increments.total_alpha
    rb = phi_weighted_prior.beta + increments.total_beta
    if not (ra > 0.0 and rb > 0.0 and math.isfinite(ra) and math.isfinite(rb)):
        return controls.reset_value, True
    rho = controls.damping
    return (
        BetaParams(
            (1.0 - rho) * phi_current.alpha + rho * ra,
            (1.0 - rho) * phi_current.beta + rho * rb,
        ),
        False,
    )


def ncvmp_solve(
    family: Family,
    theta_prev: NaturalParams,
    theta_0: NaturalParams,
    theta_q: NaturalParams,
    phi_prior: BetaParams,
    controls: NcvmpControls = NcvmpControls(),
    phi_init: BetaParams | None = None,
) -> NcvmpResult:
    """Fit ``q(w)`` for fixed ``q(z)``.

    ``theta_q`` parameterizes the current posterior over the lower variable,
    ``phi_prior`` is the (already forgetting-weighted) prior over ``w``.
    Iterates :func:`update_phi` until the largest parameter change drops
    below ``controls.tol`` or ``controls.max_iters`` is reached.
    """
    delta = theta_prev - theta_0
    if not np.any(delta.xi) and delta.eta == 0.0:
        return NcvmpResult(phi_prior, ZERO_INCREMENTS, 0, 0, True)
    dq = family.directional_derivs(theta_q, delta)[0]
    phi = phi_prior if phi_init is None else phi_init
    resets = 0
    inc = ZERO_INCREMENTS
    for it in range(1, controls.max_iters + 1):
        try:
            inc = _increments(family, theta_prev, theta_0, delta, dq, phi)
            new, reset = update_phi(phi_prior, inc, phi, controls)
        except ArithmeticError:
            new, reset = controls.reset_value, True
        change = new.max_abs_diff(phi)
        phi = new
        if reset:
            resets += 1
            continue
        if change < controls.tol:
            return NcvmpResult(phi, inc, it, resets, True)
    return NcvmpResult(phi, inc, controls.max_iters, resets, False)


def taylor_penalty(
    family: Family, phi: BetaParams, theta_prev: NaturalParams, theta_0: NaturalParams
) -> float:
    """Second-order correction ``-Var[w]/2 * B''`` to ``E_q(w)[-B(theta_hat(w))]``."""
    w_hat, var_w = beta_mean_var(phi)
    d2 = family.b_directional_derivs(theta_prev, theta_0, w_hat)[1]
    return -0.5 * var_w * d2


def beta_cross_entropy_term(phi: BetaParams, phi_prior: BetaParams) -> float:
    """``E_q[log Beta(w | phi_prior)]`` for ``q = Beta(phi)``."""
    e_log_w, e_log_1mw = _BETA.mean_params(phi.natural())
    return (
        (phi_prior.alpha - 1.0) * e_log_w
        + (phi_prior.beta - 1.0) * e_log_1mw
        - special.log_beta(phi_prior.alpha, phi_prior.beta)
    )


def beta_entropy(phi: BetaParams) -> float:
    a, b = phi.alpha, phi.beta
    return (
        special.log_beta(a, b)
        - (a - 1.0) * special.digamma(a)
        - (b - 1.0) * special.digamma(b)
        + (a + b - 2.0) * special.digamma(a + b)
    )


def approx_elbo_w_term(
    family: Family,
    phi: BetaParams,
    theta_prev: NaturalParams,
    theta_0: NaturalParams,
    q_z_mean: np.ndarray,
    phi_prior: BetaParams,
) -> float:
    """The part of the ELBO that depends on ``q(w)``, up to constants in ``q(z)``.

    ``E_q[T(z)] . theta_hat - B(theta_hat)`` plus the Taylor penalty, plus
    the cross-entropy against the prior over ``w`` and the entropy of
    ``q(w)``. Stationary points coincide with fixed points of the update.
    """
    w_hat, _ = beta_mean_var(phi)
    hat = weighted_prior(theta_prev, theta_0, w_hat)
    linear = float(np.dot(q_z_mean, family.chart(hat))) - family.log_partition(hat)
    return (
        linear
        + taylor_penalty(family, phi, theta_prev, theta_0)
        + beta_cross_entropy_term(phi, phi_prior)
        + beta_entropy(phi)
    )
