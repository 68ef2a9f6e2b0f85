"""Hierarchical adaptive forgetting variational filters.

A conjugate exponential-family posterior is forgotten toward its naive prior
with a learned weight ``w``; the posterior over ``w`` is itself forgotten
with a learned weight ``b``. See :mod:`hafvf.filtering` for the filter,
:mod:`hafvf.models` for applications and :mod:`hafvf.adafvf` for the
optimizer.
"""

from .errors import ConfigError, DomainError, HafvfError, InputError, NumericalError
from .expfam import (
    BernoulliBeta,
    GaussianNIG,
    GaussianNIW,
    LinRegNIG,
    NaturalParams,
    SufficientStats,
    make_family,
    update_theta,
    weighted_prior,
)
from .filtering import (
    FilterState,
    HierarchyConfig,
    StepDiagnostics,
    effective_memory,
    forward_backward,
    init,
    run,
    smooth,
    step,
)
from .forgetting import BetaParams, NcvmpControls, ncvmp_solve

__version__ = "0.1.0"

__all__ = [
    "BernoulliBeta",
    "BetaParams",
    "ConfigError",
    "DomainError",
    "FilterState",
    "GaussianNIG",
    "GaussianNIW",
    "HafvfError",
    "HierarchyConfig",
    "InputError",
    "LinRegNIG",
    "NaturalParams",
    "NcvmpControls",
    "NumericalError",
    "StepDiagnostics",
    "SufficientStats",
    "effective_memory",
    "forward_backward",
    "init",
    "make_family",
    "ncvmp_solve",
    "run",
    "smooth",
    "step",
    "update_theta",
    "weighted_prior",
]
