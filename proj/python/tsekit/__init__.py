"""Targeted syntactic evaluation toolkit."""

from ._core import (
    __version__,
    ConfigError,
    ConstraintError,
    Error,
    ValidationError,
    binomial_p,
    complexity_key,
    default_registry,
    fit_slope,
    generate,
    run,
    split_condition_target,
    wilson_interval,
)

__all__ = [
    "__version__",
    "ConfigError",
    "ConstraintError",
    "Error",
    "ValidationError",
    "binomial_p",
    "complexity_key",
    "default_registry",
    "fit_slope",
    "generate",
    "run",
    "split_condition_target",
    "wilson_interval",
]
