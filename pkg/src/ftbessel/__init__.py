"""Finite-temperature discrete Bessel process: gap probabilities and integrable identities."""

from .errors import (
    DegenerateDeterminantError,
    FtBesselError,
    InternalConsistencyError,
    ParameterOutOfRange,
    PoleEvaluationError,
    ResourceLimitError,
    UnsupportedPointError,
)
from .lattice import HalfInt, SigmaProfile, as_halfint, halfint_range

__version__ = "0.1.0"

__all__ = [
    "HalfInt",
    "SigmaProfile",
    "as_halfint",
    "halfint_range",
    "FtBesselError",
    "ParameterOutOfRange",
    "ResourceLimitError",
    "DegenerateDeterminantError",
    "PoleEvaluationError",
    "UnsupportedPointError",
    "InternalConsistencyError",
]
