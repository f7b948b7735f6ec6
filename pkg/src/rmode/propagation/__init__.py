"""
Propagation subpackage: closed-form and path-integrated field strength.
"""

from .model import (
    NEAR_FIELD_LIMIT_M,
    R_MIN_M,
    Transmitter,
    field_strength_homogeneous,
    homogeneous_model,
)
from .path import (
    DEFAULT_FALLBACK_SIGMA,
    PathPrediction,
    PathProfile,
    PathSegment,
    PathTracer,
    default_step_m,
    field_strength_path,
    predict_path,
    trace_path,
)

__all__ = [
    "NEAR_FIELD_LIMIT_M",
    "R_MIN_M",
    "Transmitter",
    "field_strength_homogeneous",
    "homogeneous_model",
    "DEFAULT_FALLBACK_SIGMA",
    "PathPrediction",
    "PathProfile",
    "PathSegment",
    "PathTracer",
    "default_step_m",
    "field_strength_path",
    "predict_path",
    "trace_path",
]
