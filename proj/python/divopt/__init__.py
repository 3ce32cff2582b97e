"""Two-barrier dividend strategies for a threshold-switching surplus."""

from ._divopt import (
    ConfigError,
    DomainError,
    ModelParams,
    NumericalError,
    Scale,
    classify,
    estimate_value_mc,
    oracle,
    solve,
    value,
    verify,
    zeta,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "ModelParams",
    "NumericalError",
    "Scale",
    "classify",
    "estimate_value_mc",
    "oracle",
    "solve",
    "value",
    "verify",
    "zeta",
]
