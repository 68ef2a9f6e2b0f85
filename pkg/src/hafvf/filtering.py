"""Three-level adaptive forgetting filter and its forward-backward smoother.

Level ``z`` holds the conjugate posterior over the data model, level ``w``
the Beta posterior over its forgetting factor, and level ``b`` the Beta
posterior over the forgetting of ``w``. The top level mixes with the fixed
weight ``gamma``. Two reduced hierarchies are supported: ``levels=2`` pins
``b`` to ``fixed_b`` and ``levels=1`` pins ``w`` to ``fixed_w``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .errors import ConfigError, DomainError, HafvfError
from .expfam import BernoulliBeta, Family, NaturalParams, SufficientStats, update_theta, weighted_prior
from .forgetting import (
    ZERO_INCREMENTS,
    BetaParams,
    ForgettingIncrements,
    NcvmpControls,
    beta_cross_entropy_term,
    beta_entropy,
    beta_mean_var,
    ncvmp_solve,
    taylor_penalty,
)

log = logging.getLogger(__name__)

_BETA = BernoulliBeta()


@dataclass(frozen=True)
class HierarchyConfig:
    family: Family
    theta_0: NaturalParams
    phi_0: BetaParams = BetaParams(0.9, 0.1)
    beta_0: BetaParams = BetaParams(1.0, 1.0)
    gamma: float = 1.0
    levels: int = 3
    fixed_w: float = 1.0
    fixed_b: float = 1.0
    controls: NcvmpControls = field(default_factory=NcvmpControls)
    sweep_max_iters: int = 50
    sweep_tol: float = 1e-6
    fb_window: float | None = None

    def __post_init__(self):
        if self.levels not in (1, 2, 3):
            raise ConfigError(f"levels must be 1, 2 or 3, got {self.levels}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.fixed_w <= 1.0:
            raise ConfigError(f"fixed_w must lie in [0, 1], got {self.fixed_w}")
        if not 0.0 <= self.fixed_b <= 1.0:
            raise ConfigError(f"fixed_b must lie in [0, 1], got {self.fixed_b}")
        if self.sweep_max_iters < 1 or not self.sweep_tol > 0:
            raise ConfigError("sweep_max_iters must be >= 1 and sweep_tol > 0")
        if self.fb_window is not None and not self.fb_window > 0:
            raise ConfigError(f"fb_window must be positive, got {self.fb_window}")
        try:
            self.family.check_valid(self.theta_0)
        except (DomainError, ConfigError) as exc:
            raise ConfigError(f"theta_0 is not a valid prior: {exc}") from None


@dataclass(frozen=True)
class FilterState:
    theta: NaturalParams
    phi: BetaParams
    beta: BetaParams
    t: int = 0


@dataclass(frozen=True)
class StepDiagnostics:
    e_w: float
    var_w: float
    e_b: float
    eta_eff: float
    eta_asymptote: float
    elbo: float
    log_pred: float
    increments_w: ForgettingIncrements
    increments_b: ForgettingIncrements
    iterations: int
    reset_w: bool
    reset_b: bool
    converged: bool


def init(config: HierarchyConfig) -> FilterState:
    return FilterState(config.theta_0, config.phi_0, config.beta_0, 0)


def _asymptote(eta_0: float, e_w: float) -> float:
    return math.inf if e_w >= 1.0 else eta_0 + 1.0 / (1.0 - e_w)


def expected_w(state: FilterState, config: HierarchyConfig) -> float:
    return config.fixed_w if config.levels == 1 else state.phi.mean


def effective_memory(state: FilterState, config: HierarchyConfig) -> tuple[float, float]:
    """Current effective count and its fixed point ``eta_0 + 1 / (1 - E[w])``."""
    return state.theta.eta, _asymptote(config.theta_0.eta, expected_w(state, config))


def _b_mean(beta: BetaParams, config: HierarchyConfig) -> float:
    return beta.mean if config.levels == 3 else config.fixed_b


def step(
    state: FilterState, stats: SufficientStats | None, config: HierarchyConfig
) -> tuple[FilterState, StepDiagnostics]:
    """Advance the filter by one time step.

    ``stats=None`` performs a forgetting-only step (no observation): the
    data-level prior is mixed toward ``theta_0`` and the upper levels are
    left unchanged.
    """
    fam = config.family
    theta_prev, phi_prev, beta_prev = state.theta, state.phi, state.beta
    theta_0, phi_0 = config.theta_0, config.phi_0

    beta_hat = beta_prev.mix(config.beta_0, config.gamma)
    phi_hat = phi_prev.mix(phi_0, _b_mean(beta_hat, config))
    w_pred = config.fixed_w if config.levels == 1 else phi_hat.mean
    prior_pred = weighted_prior(theta_prev, theta_0, w_pred)

    if stats is None:
        new = FilterState(prior_pred, phi_prev, beta_prev, state.t + 1)
        e_w, var_w = (w_pred, 0.0) if config.levels == 1 else beta_mean_var(phi_prev)
        diag = StepDiagnostics(
            e_w, var_w, _b_mean(beta_prev, config), prior_pred.eta,
            _asymptote(theta_0.eta, e_w), 0.0, 0.0,
            ZERO_INCREMENTS, ZERO_INCREMENTS, 0, False, False, True,
        )
        return new, diag

    log_base = stats.count * fam.log_base_measure(None)
    theta_pred = update_theta(prior_pred, stats)
    log_pred = fam.log_partition(theta_pred) - fam.log_partition(prior_pred) + log_base

    if config.levels == 1:
        # with w pinned the predictive prior is the prior, so the ELBO is the evidence
        theta, elbo = theta_pred, log_pred
        diag = StepDiagnostics(
            config.fixed_w, 0.0, config.fixed_b, theta.eta,
            _asymptote(theta_0.eta, config.fixed_w), elbo, log_pred,
            ZERO_INCREMENTS, ZERO_INCREMENTS, 1, False, False, True,
        )
        return FilterState(theta, phi_prev, beta_prev, state.t + 1), diag

    controls = config.controls
    phi, beta = phi_prev, beta_prev
    theta = None
    inc_w = inc_b = ZERO_INCREMENTS
    reset_w = reset_b = False
    converged = False
    sweeps = 0
    for sweeps in range(1, config.sweep_max_iters + 1):
        hat = weighted_prior(theta_prev, theta_0, phi.mean)
        new_theta = update_theta(hat, stats)
        phi_hat = phi_prev.mix(phi_0, _b_mean(beta, config))
        res_w = ncvmp_solve(fam, theta_prev, theta_0, new_theta, phi_hat, controls, phi_init=phi)
        inc_w = res_w.increments
        reset_w = reset_w or res_w.resets > 0
        change = res_w.phi.max_abs_diff(phi)
        if theta is not None:
            change = max(change, new_theta.max_abs_diff(theta))
        theta, phi = new_theta, res_w.phi
        if config.levels == 3:
            res_b = ncvmp_solve(
                _BETA, phi_prev.natural(), phi_0.natural(), phi.natural(), beta_hat, controls, phi_init=beta
            )
            inc_b = res_b.increments
            reset_b = reset_b or res_b.resets > 0
            change = max(change, res_b.phi.max_abs_diff(beta))
            beta = res_b.phi
        if sweeps > 1 and change < config.sweep_tol:
            converged = True
            break

    hat = weighted_prior(theta_prev, theta_0, phi.mean)
    theta = update_theta(hat, stats)
    phi_hat = phi_prev.mix(phi_0, _b_mean(beta, config))

    elbo = fam.log_partition(theta) - fam.log_partition(hat) + log_base
    elbo += taylor_penalty(fam, phi, theta_prev, theta_0)
    elbo += beta_cross_entropy_term(phi, phi_hat) + beta_entropy(phi)
    if config.levels == 3:
        elbo += taylor_penalty(_BETA, beta, phi_prev.natural(), phi_0.natural())
        elbo += beta_cross_entropy_term(beta, beta_hat) + beta_entropy(beta)

    e_w, var_w = beta_mean_var(phi)
    diag = StepDiagnostics(
        e_w, var_w, _b_mean(beta, config), theta.eta, _asymptote(theta_0.eta, e_w),
        elbo, log_pred, inc_w, inc_b, sweeps, reset_w, reset_b, converged,
    )
    if not converged:
        log.debug("step %d: sweep did not converge in %d iterations", state.t + 1, sweeps)
    return FilterState(theta, phi, beta, state.t + 1), diag


def run(
    config: HierarchyConfig, observations: Iterable[SufficientStats | None]
) -> list[tuple[FilterState, StepDiagnostics]]:
    """Fold :func:`step` over a stream; errors name the failing index."""
    state = init(config)
    out = []
    for i, stats in enumerate(observations):
        try:
            state, diag = step(state, stats, config)
        except HafvfError as exc:
            raise type(exc)(f"observation {i}: {exc}") from exc
        out.append((state, diag))
    return out


def stats_for(family: Family, observations: Iterable[Any]) -> list[SufficientStats]:
    """Sufficient statistics of raw observations (one per time step)."""
    return [family.suff_stats(x) for x in observations]


@dataclass(frozen=True)
class SmoothResult:
    combined: list[NaturalParams]
    forward: list[tuple[FilterState, StepDiagnostics]]
    backward: list[tuple[FilterState, StepDiagnostics]]
    clamped: list[bool]


def combine(
    family: Family,
    forward: NaturalParams,
    backward: NaturalParams,
    stats: SufficientStats,
    theta_0: NaturalParams,
    window: float | None = None,
) -> tuple[NaturalParams, bool]:
    """Merge forward and backward posteriors at one time step.

    ``forward + backward - T(x_t) - theta_0``: the backward pass contributes
    only what it learned from the other side of ``t``. ``window`` caps that
    contribution's effective count. Returns ``(theta, clamped)``; an invalid
    combination falls back to ``theta_0``.
    """
    # subtract theta_0 + T in the order the forward update forms it, so a
    # backward pass that saw only x_t contributes exactly zero
    base = update_theta(theta_0, stats)
    extra = NaturalParams(backward.xi - base.xi, backward.eta - base.eta)
    if window is not None and extra.eta > window:
        extra = extra.scaled(window / extra.eta)
    theta = forward + extra
    if theta.eta < 0.0 or not family.is_valid(theta):
        log.warning("forward-backward combination is invalid; falling back to the naive prior")
        return theta_0, True
    return theta, False


def smooth(config: HierarchyConfig, observations: Sequence[SufficientStats]) -> SmoothResult:
    """Offline smoothing: filter forward, filter the reversed stream, combine."""
    observations = list(observations)
    if any(s is None for s in observations):
        raise ConfigError("forward-backward smoothing needs an observation at every step")
    fwd = run(config, observations)
    bwd = run(config, observations[::-1])[::-1]
    combined, clamped = [], []
    for (fs, _), (bs, _), stats in zip(fwd, bwd, observations):
        theta, bad = combine(config.family, fs.theta, bs.theta, stats, config.theta_0, config.fb_window)
        combined.append(theta)
        clamped.append(bad)
    return SmoothResult(combined, fwd, bwd, clamped)


def forward_backward(config: HierarchyConfig, observations: Sequence[SufficientStats]) -> list[NaturalParams]:
    return smooth(config, observations).combined
