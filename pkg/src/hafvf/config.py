"""Flat ``key=value`` configuration with dotted keys.

Example::

    # two-level filter with fixed decay on w
    family = bernoulli
    prior.alpha = 1
    prior.beta = 1
    w.prior.alpha = 0.9
    w.prior.beta = 0.1
    levels = 2
    fixed_b = 0.75

Lists are comma separated. Family priors take either their usual
parameterization (``prior.*`` keys listed in :data:`PRIOR_KEYS`) or the raw
stored form ``prior.xi`` / ``prior.eta``.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, DomainError
from .expfam import BernoulliBeta, Family, GaussianNIG, GaussianNIW, LinRegNIG, NaturalParams, make_family
from .filtering import HierarchyConfig
from .forgetting import BetaParams, NcvmpControls

PRIOR_KEYS = {
    "bernoulli": ("alpha", "beta"),
    "nig": ("mu", "kappa", "a", "b"),
    "niw": ("mu", "kappa", "dof", "scale"),
    "linreg": ("mean", "precision", "a", "b"),
}

GENERAL_KEYS = {
    "family", "dim", "gamma", "levels", "fixed_w", "fixed_b",
    "w.prior.alpha", "w.prior.beta", "b.prior.alpha", "b.prior.beta",
    "ncvmp.max_iters", "ncvmp.tol", "ncvmp.damping", "ncvmp.reset.alpha", "ncvmp.reset.beta",
    "sweep.max_iters", "sweep.tol", "fb.window", "prior.xi", "prior.eta",
}

PRESETS = {
    # binary learning with the three forgetting set-ups
    "incremental": {"family": "bernoulli", "w.prior.alpha": "0.9", "w.prior.beta": "0.1", "levels": "2", "fixed_b": "1"},
    "fixed-decay": {"family": "bernoulli", "w.prior.alpha": "0.9", "w.prior.beta": "0.1", "levels": "2", "fixed_b": "0.75"},
    "three-level": {
        "family": "bernoulli", "w.prior.alpha": "0.9", "w.prior.beta": "0.1",
        "b.prior.alpha": "0.75", "b.prior.beta": "0.25", "gamma": "0.999", "levels": "3",
    },
    # moving 2-d Gaussian, weak or strong belief about w
    "track-weak": {
        "family": "niw", "dim": "2", "prior.mu": "0", "prior.kappa": "0.1", "prior.dof": "3", "prior.scale": "1",
        "w.prior.alpha": "0.9", "w.prior.beta": "0.1", "b.prior.alpha": "1", "b.prior.beta": "1", "gamma": "1",
    },
    "track-strong": {
        "family": "niw", "dim": "2", "prior.mu": "0", "prior.kappa": "0.1", "prior.dof": "3", "prior.scale": "1",
        "w.prior.alpha": "9", "w.prior.beta": "1", "b.prior.alpha": "1", "b.prior.beta": "1", "gamma": "1",
    },
    "ar": {
        "family": "linreg", "prior.mean": "0", "prior.precision": "1", "prior.a": "1", "prior.b": "0.1",
        "w.prior.alpha": "4.5", "w.prior.beta": "0.5", "b.prior.alpha": "1", "b.prior.beta": "1", "gamma": "1",
    },
}


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def load(path: str) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_text(fh.read(), path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None


def parse_overrides(items: Iterable[str]) -> dict[str, str]:
    return parse_text("\n".join(items), "--set")


def _float(raw: Mapping[str, str], key: str, default: float | None = None) -> float:
    if key not in raw:
        if default is None:
            raise ConfigError(f"missing required field {key!r}")
        return default
    try:
        value = float(raw[key])
    except ValueError:
        raise ConfigError(f"field {key!r}: expected a number, got {raw[key]!r}") from None
    if math.isnan(value):
        raise ConfigError(f"field {key!r}: NaN is not allowed")
    return value


def _int(raw, key, default):
    value = _float(raw, key, float(default))
    if value != int(value):
        raise ConfigError(f"field {key!r}: expected an integer, got {raw[key]!r}")
    return int(value)


def _floats(raw, key, default):
    if key not in raw:
        return np.asarray(default, dtype=float)
    try:
        return np.array([float(v) for v in raw[key].split(",")], dtype=float)
    except ValueError:
        raise ConfigError(f"field {key!r}: expected comma-separated numbers, got {raw[key]!r}") from None


def _scalar_or_list(values: np.ndarray):
    return float(values[0]) if values.size == 1 else values


def _beta(raw, prefix, default: BetaParams) -> BetaParams:
    a = _float(raw, f"{prefix}.alpha", default.alpha)
    b = _float(raw, f"{prefix}.beta", default.beta)
    try:
        return BetaParams(a, b)
    except (ConfigError, DomainError) as exc:
        raise ConfigError(f"field {prefix}: {exc}") from None


def check_keys(raw: Mapping[str, str], family_name: str | None) -> None:
    allowed = set(GENERAL_KEYS)
    if family_name in PRIOR_KEYS:
        allowed |= {f"prior.{k}" for k in PRIOR_KEYS[family_name]}
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown config field {key!r}")


def family_prior(family: Family, raw: Mapping[str, str]) -> NaturalParams:
    """The naive prior ``theta_0`` from ``prior.*`` keys (defaults are weak)."""
    if "prior.xi" in raw or "prior.eta" in raw:
        theta = NaturalParams(_floats(raw, "prior.xi", []), _float(raw, "prior.eta"))
        if theta.xi.shape != (family.xi_dim,):
            raise ConfigError(f"field 'prior.xi': expected {family.xi_dim} values, got {theta.xi.size}")
        try:
            family.check_valid(theta)
        except DomainError as exc:
            raise ConfigError(f"field 'prior.xi': {exc}") from None
        return theta
    try:
        if isinstance(family, BernoulliBeta):
            return family.params(_float(raw, "prior.alpha", 1.0), _float(raw, "prior.beta", 1.0))
        if isinstance(family, GaussianNIG):
            return family.params(
                _scalar_or_list(_floats(raw, "prior.mu", [0.0])), _float(raw, "prior.kappa", 1.0),
                _float(raw, "prior.a", 1.0), _scalar_or_list(_floats(raw, "prior.b", [1.0])),
            )
        if isinstance(family, GaussianNIW):
            d = family.dim
            scale = _floats(raw, "prior.scale", [1.0])
            if scale.size == d * d:
                scale = scale.reshape(d, d)
            elif scale.size != 1:
                raise ConfigError(f"field 'prior.scale': expected 1 or {d * d} values")
            return family.params(
                _scalar_or_list(_floats(raw, "prior.mu", [0.0])), _float(raw, "prior.kappa", 1.0),
                _float(raw, "prior.dof", d + 1.0), _scalar_or_list(scale) if scale.ndim == 1 else scale,
            )
        if isinstance(family, LinRegNIG):
            p = family.dim
            prec = _floats(raw, "prior.precision", [1.0])
            if prec.size == p * p:
                prec = prec.reshape(p, p)
            elif prec.size != 1:
                raise ConfigError(f"field 'prior.precision': expected 1 or {p * p} values")
            return family.params(
                _scalar_or_list(_floats(raw, "prior.mean", [0.0])),
                _scalar_or_list(prec) if prec.ndim == 1 else prec,
                _float(raw, "prior.a", 1.0), _float(raw, "prior.b", 1.0),
            )
    except DomainError as exc:
        raise ConfigError(f"prior: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"prior: {exc}") from None
    raise ConfigError(f"no prior parser for family {family.name!r}")


def build(raw: Mapping[str, str], family: Family | None = None) -> HierarchyConfig:
    """Build a :class:`HierarchyConfig`; ``family`` overrides the ``family`` key."""
    if family is None:
        name = raw.get("family", "bernoulli")
        dim = _int(raw, "dim", 0) if "dim" in raw else None
        family = make_family(name, dim)
    check_keys(raw, family.name)
    reset = _beta(raw, "ncvmp.reset", BetaParams(10.0, 10.0))
    controls = NcvmpControls(
        max_iters=_int(raw, "ncvmp.max_iters", 100),
        tol=_float(raw, "ncvmp.tol", 1e-6),
        damping=_float(raw, "ncvmp.damping", 0.5),
        reset_value=reset,
    )
    window = _float(raw, "fb.window") if "fb.window" in raw else None
    return HierarchyConfig(
        family=family,
        theta_0=family_prior(family, raw),
        phi_0=_beta(raw, "w.prior", BetaParams(0.9, 0.1)),
        beta_0=_beta(raw, "b.prior", BetaParams(1.0, 1.0)),
        gamma=_float(raw, "gamma", 1.0),
        levels=_int(raw, "levels", 3),
        fixed_w=_float(raw, "fixed_w", 1.0),
        fixed_b=_float(raw, "fixed_b", 1.0),
        controls=controls,
        sweep_max_iters=_int(raw, "sweep.max_iters", 50),
        sweep_tol=_float(raw, "sweep.tol", 1e-6),
        fb_window=window,
    )
