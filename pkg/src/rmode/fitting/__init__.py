"""
Estimation of C, e and per-conductivity ea from reference curves.
"""

from .curves import MIN_SAMPLES, ReferenceCurve, load_curve, synthesize_curve, write_curve
from .export import load_fit_ea_table, load_params, save_ea_table, save_fit_report, save_fit_result
from .solver import (
    EaFit,
    FitResult,
    SearchConfig,
    evaluate_residuals,
    fit_ea_fixed_params,
    fit_ea_table,
    fit_global,
    profile_sse,
)

__all__ = [
    "MIN_SAMPLES",
    "ReferenceCurve",
    "load_curve",
    "synthesize_curve",
    "write_curve",
    "load_fit_ea_table",
    "load_params",
    "save_ea_table",
    "save_fit_report",
    "save_fit_result",
    "EaFit",
    "FitResult",
    "SearchConfig",
    "evaluate_residuals",
    "fit_ea_fixed_params",
    "fit_ea_table",
    "fit_global",
    "profile_sse",
]
