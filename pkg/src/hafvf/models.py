"""Applications built on the filter: adaptive AR models, distribution
tracking, and synthetic scenario generators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import stats as sps

from .errors import ConfigError, InputError
from .expfam import GaussianNIW, LinRegNIG, NaturalParams, SufficientStats
from .filtering import HierarchyConfig, StepDiagnostics, run, smooth

SCENARIOS = ("binary-switch", "gaussian-2d-walk", "sinusoid-mix", "impulse-artifacts")


# ---------------------------------------------------------------- generators


@dataclass(frozen=True)
class SyntheticSpec:
    scenario: str
    seed: int = 0
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Synthetic:
    observations: np.ndarray
    changes: tuple[int, ...]
    artifacts: tuple[int, ...] = ()


def _binary_switch(rng, period=40, p_high=0.8, n=200):
    period, n = int(period), int(n)
    if period < 1 or n < 0 or not 0.0 <= p_high <= 1.0:
        raise ConfigError("binary-switch needs period >= 1, n >= 0 and p_high in [0, 1]")
    t = np.arange(n)
    p = np.where((t // period) % 2 == 0, p_high, 1.0 - p_high)
    x = (rng.random(n) < p).astype(float)
    return Synthetic(x, tuple(range(period, n, period)))


def _gaussian_walk(rng, n=200, walk_sd=0.05, noise_sd=1.0, mu1=(-2.0, 2.0), mu2=(2.0, -2.0)):
    n = int(n)
    if n < 1 or walk_sd < 0 or noise_sd <= 0:
        raise ConfigError("gaussian-2d-walk needs n >= 1, walk_sd >= 0 and noise_sd > 0")
    out = []
    for mu in (mu1, mu2):
        mu = np.asarray(mu, dtype=float)
        if mu.shape != (2,):
            raise ConfigError("gaussian-2d-walk means must have two coordinates")
        walk = np.cumsum(rng.normal(0.0, walk_sd, size=(n, 2)), axis=0)
        out.append(mu + walk + rng.normal(0.0, noise_sd, size=(n, 2)))
    return Synthetic(np.vstack(out), (n,))


def _waves(rng, t, freq_range, waves):
    freqs = rng.uniform(*freq_range, size=waves)
    amps = rng.uniform(0.5, 1.5, size=waves)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=waves)
    return (amps[:, None] * np.sin(2.0 * np.pi * freqs[:, None] * t[None, :] + phases[:, None])).sum(axis=0)


def _sinusoid_mix(rng, n=400, waves=5, low=(0.005, 0.03), high=(0.05, 0.15), noise_var=0.1):
    """Two regimes of ``n // 2`` samples: a low-frequency then a high-frequency
    sum of ``waves`` sinusoids, plus white noise."""
    n, waves = int(n), int(waves)
    if n < 2 or waves < 1 or noise_var < 0:
        raise ConfigError("sinusoid-mix needs n >= 2, waves >= 1 and noise_var >= 0")
    half = n // 2
    t = np.arange(n, dtype=float)
    lo = _waves(rng, t[:half], low, waves)
    hi = _waves(rng, t[half:], high, waves)
    x = np.concatenate([lo, hi]) + rng.normal(0.0, math.sqrt(noise_var), size=n)
    return Synthetic(x, (half,))


def _impulse_artifacts(rng, n=400, impulses=(100, 300), magnitude=2.0, **kw):
    base = _sinusoid_mix(rng, n=n, **kw)
    x = base.observations.copy()
    impulses = tuple(int(i) for i in impulses)
    if any(not 0 <= i < len(x) for i in impulses):
        raise ConfigError("impulse times must lie inside the signal")
    x[list(impulses)] += magnitude
    return Synthetic(x, base.changes, impulses)


_GENERATORS = {
    "binary-switch": _binary_switch,
    "gaussian-2d-walk": _gaussian_walk,
    "sinusoid-mix": _sinusoid_mix,
    "impulse-artifacts": _impulse_artifacts,
}


def generate(spec: SyntheticSpec) -> Synthetic:
    """Deterministic synthetic stream with its true change trials (0-based
    index of the first observation of each new regime)."""
    try:
        gen = _GENERATORS[spec.scenario]
    except KeyError:
        raise ConfigError(f"unknown scenario {spec.scenario!r}; choose from {', '.join(SCENARIOS)}") from None
    rng = np.random.default_rng(spec.seed)
    try:
        return gen(rng, **spec.params)
    except TypeError as exc:
        raise ConfigError(f"{spec.scenario}: {exc}") from None


# ---------------------------------------------------------------- AR models


@dataclass(frozen=True)
class ArConfig:
    order: int
    hierarchy: HierarchyConfig
    smoothing: str = "forward"

    def __post_init__(self):
        if self.order < 1:
            raise ConfigError(f"AR order must be >= 1, got {self.order}")
        fam = self.hierarchy.family
        if not isinstance(fam, LinRegNIG) or fam.dim != self.order:
            raise ConfigError(f"AR({self.order}) needs a linreg family of dimension {self.order}")
        if self.smoothing not in ("forward", "forward-backward"):
            raise ConfigError(f"smoothing must be 'forward' or 'forward-backward', got {self.smoothing!r}")


def ar_hierarchy(order: int, prior_precision=1.0, a=1.0, b=0.1, **kw) -> HierarchyConfig:
    """Hierarchy over ``LinRegNIG(order)`` with a zero-mean coefficient prior."""
    fam = LinRegNIG(order)
    return HierarchyConfig(fam, fam.params(0.0, prior_precision, a, b), **kw)


@dataclass(frozen=True)
class ArStep:
    t: int
    theta: NaturalParams
    coef_mean: np.ndarray
    coef_sd: np.ndarray
    noise_var_mean: float
    diagnostics: StepDiagnostics


def ar_stats(signal: Sequence[float], order: int) -> list[SufficientStats]:
    """Regression statistics with regressors ``(x[t-1], ..., x[t-order])``."""
    x = np.asarray(signal, dtype=float).ravel()
    if len(x) <= order:
        raise InputError(f"signal of length {len(x)} is too short for order {order}")
    if not np.all(np.isfinite(x)):
        raise InputError("signal contains non-finite values")
    fam = LinRegNIG(order)
    return [fam.suff_stats((x[t - order : t][::-1], x[t])) for t in range(order, len(x))]


def ar_fit(config: ArConfig, signal: Sequence[float]) -> list[ArStep]:
    """Fit the adaptive AR model; one :class:`ArStep` per sample from ``t = order``.

    Diagnostics always come from the forward pass.
    """
    fam = config.hierarchy.family
    obs = ar_stats(signal, config.order)
    if config.smoothing == "forward":
        fwd = run(config.hierarchy, obs)
        thetas = [s.theta for s, _ in fwd]
    else:
        res = smooth(config.hierarchy, obs)
        fwd, thetas = res.forward, res.combined
    out = []
    for i, (theta, (_, diag)) in enumerate(zip(thetas, fwd)):
        s = fam.summary(theta)
        out.append(
            ArStep(i + config.order, theta, np.array(s["coef_mean"]), np.array(s["coef_sd"]), s["noise_var_mean"], diag)
        )
    return out


def ar_predict(family: LinRegNIG, theta: NaturalParams, recent: Sequence[float], horizon: int):
    """Iterated posterior-predictive ``(mean, variance)`` pairs.

    ``recent`` holds the last ``order`` samples, oldest first. Moments of the
    lagged state are propagated exactly to second order, treating the
    coefficients as independent of the state with their posterior mean and
    covariance.
    """
    p = family.dim
    recent = np.asarray(recent, dtype=float).ravel()
    if len(recent) != p:
        raise InputError(f"need the last {p} samples, got {len(recent)}")
    if horizon <= 0:
        return []
    st = family.standard(theta)
    a, b = st["a"], st["b"]
    noise = b / (a - 1.0) if a > 1.0 else b / a
    m = st["mean"]
    cov_coef = np.linalg.inv(st["precision"]) * noise
    mean = recent[::-1].copy()
    cov = np.zeros((p, p))
    out = []
    for _ in range(horizon):
        mu = float(m @ mean)
        var = float(m @ cov @ m + np.trace(cov_coef @ cov) + mean @ cov_coef @ mean + noise)
        cross = cov @ m
        new_cov = np.empty((p, p))
        new_cov[0, 0] = var
        new_cov[0, 1:] = new_cov[1:, 0] = cross[: p - 1]
        new_cov[1:, 1:] = cov[: p - 1, : p - 1]
        mean = np.concatenate([[mu], mean[: p - 1]])
        cov = new_cov
        out.append((mu, var))
    return out


# ---------------------------------------------------------------- tracking


@dataclass(frozen=True)
class TrackStep:
    t: int
    mean: np.ndarray
    cov: np.ndarray
    kappa: float
    e_w: float
    mean_lo: np.ndarray
    mean_hi: np.ndarray


def _niw_summary(family: GaussianNIW, theta: NaturalParams, level: float):
    st = family.standard(theta)
    d = family.dim
    mu, kappa, nu, scale = st["mu"], st["kappa"], st["dof"], st["scale"]
    cov = scale / (nu - d - 1.0) if nu > d + 1 else np.full((d, d), math.inf)
    # marginal of each mean coordinate is Student-t with nu - d + 1 dof
    df = nu - d + 1.0
    half = sps.t.ppf(0.5 + 0.5 * level, df) * np.sqrt(np.diag(scale) / (kappa * df))
    return mu, cov, kappa, mu - half, mu + half


def track_distribution(
    config: HierarchyConfig, stream: Sequence[Sequence[float]], smoothing: bool = False, level: float = 0.95
) -> list[TrackStep]:
    """Track a moving multivariate Gaussian with an NIW hierarchy.

    ``mean_lo``/``mean_hi`` bound the posterior ``level`` credible interval of
    each mean coordinate.
    """
    fam = config.family
    if not isinstance(fam, GaussianNIW):
        raise ConfigError("track_distribution needs a GaussianNIW family")
    xs = np.asarray(stream, dtype=float)
    if xs.size == 0:
        return []
    if xs.ndim != 2 or xs.shape[1] != fam.dim:
        raise InputError(f"observations must have dimension {fam.dim}, got shape {xs.shape}")
    obs = [fam.suff_stats(x) for x in xs]
    if smoothing:
        res = smooth(config, obs)
        thetas, fwd = res.combined, res.forward
    else:
        fwd = run(config, obs)
        thetas = [s.theta for s, _ in fwd]
    out = []
    for t, (theta, (_, diag)) in enumerate(zip(thetas, fwd)):
        mu, cov, kappa, lo, hi = _niw_summary(fam, theta, level)
        out.append(TrackStep(t, mu, cov, kappa, diag.e_w, lo, hi))
    return out
