"""Adam-like stochastic-gradient optimizer with learned forgetting.

Each parameter group carries two filter stacks over a GaussianNIG model of
its gradient coordinates (shared counts within a group). The first stack,
with forgetting ``w1``, supplies the gradient mean; the second, with the
slower forgetting ``w2``, supplies the second moment. ``E[w1] <= E[w2]`` is
enforced after every step by rescaling the first stack's ``q(w)`` at fixed
strength ``alpha + beta``.

The update is ``-step_size * m / (sqrt(v) + epsilon)`` with ``m`` the
posterior mean of the gradient mean and ``v`` the posterior mean of
``mu**2 + sigma**2`` (``second_moment="raw"``) or of ``sigma**2``
(``"centered"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputError
from .expfam import GaussianNIG
from .filtering import FilterState, HierarchyConfig, init, step
from .forgetting import BetaParams, NcvmpControls


@dataclass(frozen=True)
class OptimizerConfig:
    step_size: float = 1e-3
    epsilon: float = 1e-8
    phi1_0: BetaParams = BetaParams(9.0, 1.0)
    phi2_0: BetaParams = BetaParams(9.5, 0.5)
    beta_0: BetaParams = BetaParams(1.0, 1.0)
    gamma: float = 1.0
    levels: int = 3
    fixed_w1: float = 0.9
    fixed_w2: float = 0.999
    second_moment: str = "raw"
    # NIG prior over each gradient coordinate
    prior_kappa: float = 1e-2
    prior_a: float = 1.0
    prior_b: float = 1.0
    controls: NcvmpControls = field(default_factory=NcvmpControls)

    def __post_init__(self):
        if not self.step_size > 0 or not self.epsilon > 0:
            raise ConfigError("step_size and epsilon must be positive")
        if self.second_moment not in ("raw", "centered"):
            raise ConfigError(f"second_moment must be 'raw' or 'centered', got {self.second_moment!r}")
        if self.levels not in (1, 2, 3):
            raise ConfigError(f"levels must be 1, 2 or 3, got {self.levels}")
        if self.levels == 1 and self.fixed_w1 > self.fixed_w2:
            raise ConfigError("fixed_w1 must not exceed fixed_w2")


@dataclass(frozen=True)
class GroupState:
    mean_stack: FilterState
    var_stack: FilterState
    step_count: int = 0


@dataclass(frozen=True)
class OptDiagnostics:
    e_w1: float
    e_w2: float
    rejected: bool
    clamped: bool


def _stack_config(config: OptimizerConfig, size: int, phi_0: BetaParams, fixed_w: float) -> HierarchyConfig:
    fam = GaussianNIG(size)
    theta_0 = fam.params(0.0, config.prior_kappa, config.prior_a, config.prior_b)
    return HierarchyConfig(
        fam, theta_0, phi_0, config.beta_0, gamma=config.gamma, levels=config.levels,
        fixed_w=fixed_w, controls=config.controls,
    )


@dataclass(frozen=True)
class GroupSetup:
    """Per-group hierarchy configurations for the two stacks."""

    size: int
    mean_config: HierarchyConfig
    var_config: HierarchyConfig

    @classmethod
    def build(cls, config: OptimizerConfig, size: int) -> "GroupSetup":
        if size < 1:
            raise ConfigError("parameter groups must be non-empty")
        return cls(
            size,
            _stack_config(config, size, config.phi1_0, config.fixed_w1),
            _stack_config(config, size, config.phi2_0, config.fixed_w2),
        )

    def init(self) -> GroupState:
        return GroupState(init(self.mean_config), init(self.var_config), 0)


def _moments(fam: GaussianNIG, state: FilterState, config: OptimizerConfig):
    st = fam.standard(state.theta)
    mu, kappa, a, b = st["mu"], st["kappa"], st["a"], st["b"]
    # E[sigma^2] needs a > 1; fall back to the mode-like b / a before that
    e_var = b / (a - 1.0) if a > 1.0 else b / a
    if config.second_moment == "centered":
        return mu, e_var
    return mu, mu * mu + e_var * (1.0 + 1.0 / kappa)


def expected_w(state: FilterState, hc: HierarchyConfig) -> float:
    return hc.fixed_w if hc.levels == 1 else state.phi.mean


def opt_step(
    state: GroupState, gradient: Sequence[float], setup: GroupSetup, config: OptimizerConfig
) -> tuple[np.ndarray, GroupState, OptDiagnostics]:
    """One optimizer step for a parameter group; returns ``(update, state, diagnostics)``.

    A non-finite gradient is rejected: both stacks take a forgetting-only step
    and the update is zero.
    """
    g = np.asarray(gradient, dtype=float).ravel()
    if g.shape != (setup.size,):
        raise InputError(f"gradient has {g.size} entries, group expects {setup.size}")
    rejected = not np.all(np.isfinite(g))
    fam = setup.mean_config.family
    stats = None if rejected else fam.suff_stats(g)
    mean_stack, _ = step(state.mean_stack, stats, setup.mean_config)
    var_stack, _ = step(state.var_stack, stats, setup.var_config)

    clamped = False
    if config.levels > 1 and mean_stack.phi.mean > var_stack.phi.mean:
        strength = mean_stack.phi.alpha + mean_stack.phi.beta
        m2 = var_stack.phi.mean
        mean_stack = replace(mean_stack, phi=BetaParams(strength * m2, strength * (1.0 - m2)))
        clamped = True

    new = GroupState(mean_stack, var_stack, state.step_count + 1)
    if rejected:
        update = np.zeros(setup.size)
    else:
        m, _ = _moments(fam, mean_stack, config)
        _, v = _moments(fam, var_stack, config)
        update = -config.step_size * m / (np.sqrt(v) + config.epsilon)
    diag = OptDiagnostics(
        expected_w(mean_stack, setup.mean_config), expected_w(var_stack, setup.var_config), rejected, clamped
    )
    return update, new, diag


class AdaFVF:
    """Optimizer over a flat parameter vector split into contiguous groups."""

    def __init__(self, sizes: Sequence[int], config: OptimizerConfig | None = None):
        self.config = config or OptimizerConfig()
        self.setups = [GroupSetup.build(self.config, int(n)) for n in sizes]
        self.bounds = np.cumsum([0] + [s.size for s in self.setups])
        self.states = [s.init() for s in self.setups]

    def step(self, gradient: Sequence[float]) -> tuple[np.ndarray, list[OptDiagnostics]]:
        g = np.asarray(gradient, dtype=float).ravel()
        if g.size != self.bounds[-1]:
            raise InputError(f"gradient has {g.size} entries, expected {self.bounds[-1]}")
        update = np.empty_like(g)
        diags = []
        for i, setup in enumerate(self.setups):
            lo, hi = self.bounds[i], self.bounds[i + 1]
            u, self.states[i], d = opt_step(self.states[i], g[lo:hi], setup, self.config)
            update[lo:hi] = u
            diags.append(d)
        return update, diags


class Adam:
    """Reference Adam with bias correction, used as the fixed-decay baseline."""

    def __init__(self, size: int, step_size=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.lr, self.b1, self.b2, self.eps = step_size, beta1, beta2, epsilon
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, gradient) -> np.ndarray:
        g = np.asarray(gradient, dtype=float)
        self.t += 1
        self.m = self.b1 * self.m + (1.0 - self.b1) * g
        self.v = self.b2 * self.v + (1.0 - self.b2) * g * g
        m_hat = self.m / (1.0 - self.b1**self.t)
        v_hat = self.v / (1.0 - self.b2**self.t)
        return -self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


# ---------------------------------------------------------------- testbed


@dataclass(frozen=True)
class Testbed:
    """Noisy quadratic bowl ``0.5 * sum(h * x**2)``.

    Gradients carry Gaussian noise of scale ``noise``. A random subset of
    ``round(outlier_rate * iterations)`` steps has its gradient multiplied by
    ``outlier_scale``.
    """

    sizes: tuple[int, ...] = (10,)
    noise: float = 0.5
    outlier_rate: float = 0.01
    outlier_scale: float = 100.0
    curvature: tuple[float, float] = (0.5, 2.0)
    init_scale: float = 2.0


@dataclass(frozen=True)
class TrainResult:
    loss: np.ndarray
    memory: np.ndarray  # E[w] per step and group, shape (iterations, 2 * groups)
    outliers: np.ndarray
    baseline_loss: np.ndarray


def train_testbed(testbed: Testbed, config: OptimizerConfig, iterations: int, seed: int = 0) -> TrainResult:
    """Run AdaFVF and the Adam baseline on identical gradient noise."""
    rng = np.random.default_rng(seed)
    dim = int(sum(testbed.sizes))
    h = rng.uniform(*testbed.curvature, size=dim)
    x0 = rng.normal(0.0, testbed.init_scale, size=dim)
    noise = rng.normal(0.0, testbed.noise, size=(iterations, dim))
    outliers = np.zeros(iterations, dtype=bool)
    outliers[rng.permutation(iterations)[: round(testbed.outlier_rate * iterations)]] = True

    def loss(x):
        return 0.5 * float(np.sum(h * x * x))

    def grad(x, t):
        g = h * x + noise[t]
        return g * testbed.outlier_scale if outliers[t] else g

    opt = AdaFVF(testbed.sizes, config)
    adam = Adam(dim, step_size=config.step_size)
    x, y = x0.copy(), x0.copy()
    losses, base, memory = [], [], []
    for t in range(iterations):
        u, diags = opt.step(grad(x, t))
        x = x + u
        y = y + adam.step(grad(y, t))
        losses.append(loss(x))
        base.append(loss(y))
        memory.append([v for d in diags for v in (d.e_w1, d.e_w2)])
    shape = (iterations, 2 * len(testbed.sizes))
    return TrainResult(
        np.array(losses), np.array(memory, dtype=float).reshape(shape), outliers, np.array(base)
    )


def final_loss(trace: np.ndarray, tail: int = 50) -> float:
    """Mean loss over the last ``tail`` iterations (``nan`` for an empty trace)."""
    return float(np.mean(trace[-tail:])) if len(trace) else math.nan
