"""Exact p-adic series rings, their Frobenius and Galois operators, and syntomic complexes over Z/p^n."""

from .errors import (
    BandError,
    CommutationError,
    ConfigError,
    ConvergenceError,
    MembershipError,
    PrecisionError,
)
from .padic import PrecisionBudget, ScaledPAdic, binom_coeff, log_series_coeff, scaled_arith
from .rings import DecoSeries, FiltClass, RingSpec, TorusSeries, check_membership, lb, reduce_mod_Fr

__version__ = "0.1.0"

__all__ = [
    "BandError",
    "CommutationError",
    "ConfigError",
    "ConvergenceError",
    "DecoSeries",
    "FiltClass",
    "MembershipError",
    "PrecisionBudget",
    "PrecisionError",
    "RingSpec",
    "ScaledPAdic",
    "TorusSeries",
    "binom_coeff",
    "check_membership",
    "lb",
    "log_series_coeff",
    "reduce_mod_Fr",
    "scaled_arith",
]
