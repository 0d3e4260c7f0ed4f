"""Fractional Choquard-type NLS with inhomogeneous nonlinearity: exponents,
spectral discretization, ground states, time evolution and virial diagnostics."""
from .errors import ConfigError, FCNLSError, NumericalError, SnapshotError, ValidationError
from .model import DerivedExponents, ProblemParams, RegimeFlags, derive, regime, riesz_normalization, validate
from .spectral import Field, Grid

__all__ = [
    "FCNLSError", "ValidationError", "NumericalError", "SnapshotError", "ConfigError",
    "ProblemParams", "DerivedExponents", "RegimeFlags", "validate", "derive", "regime",
    "riesz_normalization", "Grid", "Field",
]
