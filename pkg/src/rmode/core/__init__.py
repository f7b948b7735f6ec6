"""
Core subpackage for rmode.

Contains shared types, exceptions, and logging utilities.
"""

from .types import (
    EaPolicy,
    PropagationParams,
    MF_RMODE_PARAMS,
    ELORAN_PARAMS,
    PARAM_PRESETS,
)
from .exceptions import (
    RModeError,
    ConfigError,
    AntipodalPathError,
    DegeneratePathError,
    ParseError,
    InvalidConductivityError,
    UnmappedClassError,
    OutsideRasterError,
    NoDataCellError,
    InterpolationError,
    NotInTableError,
    InvalidSigmaError,
    InvalidParamsError,
    InvalidCurveError,
    DegenerateCurveError,
    NoCurvesError,
    NonFiniteInputError,
    FitDivergedError,
    InvalidGridError,
    BelowMinRangeError,
    InvalidGridSpecError,
    GridEncodingError,
)

__all__ = [
    # Types
    "EaPolicy",
    "PropagationParams",
    "MF_RMODE_PARAMS",
    "ELORAN_PARAMS",
    "PARAM_PRESETS",
    # Exceptions
    "RModeError",
    "ConfigError",
    "AntipodalPathError",
    "DegeneratePathError",
    "ParseError",
    "InvalidConductivityError",
    "UnmappedClassError",
    "OutsideRasterError",
    "NoDataCellError",
    "InterpolationError",
    "NotInTableError",
    "InvalidSigmaError",
    "InvalidParamsError",
    "InvalidCurveError",
    "DegenerateCurveError",
    "NoCurvesError",
    "NonFiniteInputError",
    "FitDivergedError",
    "InvalidGridError",
    "BelowMinRangeError",
    "InvalidGridSpecError",
    "GridEncodingError",
]
