"""
Least-squares estimation of the model constants.

For fixed (C, e) the best ea of a curve has a closed form:
``ea = sum(w*d*r) / sum(w*r**2)`` with ``d = C - 10*e*log10(r) - F``.
The global fit profiles ea out of the objective and searches (C, e) with a
coarse grid followed by Nelder-Mead refinement.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import minimize

from ..conductivity.ea_table import EaTable
from ..core.exceptions import (
    DegenerateCurveError,
    FitDivergedError,
    InvalidParamsError,
    NoCurvesError,
    NonFiniteInputError,
)
from ..core.logging import get_logger
from ..core.types import PropagationParams
from ..core.utils import format_float
from ..propagation.model import homogeneous_model
from .curves import ReferenceCurve

logger = get_logger(__name__)

# SSE at which restarts stop; model-generated data reaches it.
_SSE_FLOOR = 1e-20


class EaFit(NamedTuple):
    ea_db_per_m: float
    rms_db: float


@dataclass(frozen=True)
class SearchConfig:
    """
    Outer search over (C, e).

    Attributes:
        c_min, c_max: C bounds for the coarse grid, dB(uV/m)
        e_min, e_max: Exponent bounds for the coarse grid
        c_steps, e_steps: Grid resolution
        rel_tol: Relative SSE change at which Nelder-Mead restarts stop
        max_iter: Nelder-Mead iteration cap per run
        max_restarts: Nelder-Mead runs after the grid search
        n_jobs: joblib workers for the grid search (1 = sequential)
    """
    c_min: float = 150.0
    c_max: float = 250.0
    e_min: float = 1.5
    e_max: float = 3.0
    c_steps: int = 41
    e_steps: int = 31
    rel_tol: float = 1e-9
    max_iter: int = 5000
    max_restarts: int = 10
    n_jobs: int = 1

    def __post_init__(self) -> None:
        if not self.c_min < self.c_max:
            raise ValueError(f"c_min must be < c_max, got [{self.c_min}, {self.c_max}]")
        if not 0.0 < self.e_min < self.e_max < 4.0:
            raise ValueError(f"Exponent bounds must satisfy 0 < e_min < e_max < 4, got [{self.e_min}, {self.e_max}]")
        if self.c_steps < 2 or self.e_steps < 2:
            raise ValueError("Grid needs at least 2 steps per axis")
        if self.max_restarts < 1 or self.max_iter < 1:
            raise ValueError("max_restarts and max_iter must be >= 1")


@dataclass
class FitResult:
    """
    Outcome of a global fit.

    Attributes:
        params: Best (C, e)
        ea_by_sigma: (sigma, ea) per input curve, in input order
        rms_by_curve: RMS residual per input curve, dB
        pooled_rms_db: RMS residual over all samples, dB
        iterations: Total Nelder-Mead iterations
        sse: Pooled (weighted) sum of squared residuals at the optimum
        grid_best: (C, e) of the best coarse-grid candidate
        source_labels: Curve labels, in input order
    """
    params: PropagationParams
    ea_by_sigma: List[Tuple[float, float]]
    rms_by_curve: List[float]
    pooled_rms_db: float
    iterations: int
    sse: float = 0.0
    grid_best: Optional[Tuple[float, float]] = None
    source_labels: List[str] = field(default_factory=list)

    def to_ea_table(self) -> EaTable:
        """ea table sorted by conductivity; curves must have distinct conductivities."""
        rows = sorted(self.ea_by_sigma)
        sigmas = [s for s, _ in rows]
        if len(set(sigmas)) != len(sigmas):
            raise ValueError("Cannot build an ea table from curves sharing a conductivity")
        return EaTable(rows=tuple(rows))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        labels = self.source_labels or [""] * len(self.ea_by_sigma)
        return {
            "c_dbuvm": self.params.c_dbuvm,
            "e_exponent": self.params.e_exponent,
            "pooled_rms_db": self.pooled_rms_db,
            "sse": self.sse,
            "iterations": self.iterations,
            "curves": [
                {
                    "sigma_s_per_m": sigma,
                    "ea_db_per_m": ea,
                    "rms_db": rms,
                    "source_label": label,
                }
                for (sigma, ea), rms, label in zip(self.ea_by_sigma, self.rms_by_curve, labels)
            ],
        }

    def report(self) -> str:
        """Human-readable fit report."""
        lines = [
            "Ground-wave model fit",
            f"  C            = {self.params.c_dbuvm:.6f} dB(uV/m)",
            f"  e            = {self.params.e_exponent:.6f}",
            f"  pooled rms   = {self.pooled_rms_db:.3e} dB",
            f"  iterations   = {self.iterations}",
            "",
            f"  {'sigma [S/m]':>14}  {'ea [dB/m]':>14}  {'rms [dB]':>10}  source",
        ]
        labels = self.source_labels or [""] * len(self.ea_by_sigma)
        for (sigma, ea), rms, label in zip(self.ea_by_sigma, self.rms_by_curve, labels):
            lines.append(f"  {sigma:>14.4g}  {ea:>14.4e}  {rms:>10.3e}  {label}")
        return "\n".join(lines) + "\n"


# ============================================================================
# Closed form per curve
# ============================================================================

def _check_finite(curve: ReferenceCurve) -> None:
    if not np.all(np.isfinite(curve.field_dbuvm)):
        raise NonFiniteInputError(
            f"Curve '{curve.source_label}' (sigma={curve.sigma_s_per_m}) has non-finite field samples",
            source_label=curve.source_label,
        )


def _closed_form(curve: ReferenceCurve, params: PropagationParams) -> Tuple[float, np.ndarray]:
    r = curve.r_m
    w = curve.sample_weights
    denom = float(np.sum(w * r * r))
    if denom == 0.0:
        raise DegenerateCurveError(f"Curve '{curve.source_label}' has sum(w*r^2) == 0")

    d = params.c_dbuvm - 10.0 * params.e_exponent * np.log10(r) - curve.field_dbuvm
    ea = float(np.sum(w * d * r)) / denom
    return ea, d - ea * r


def _rms(residuals: np.ndarray, weights: np.ndarray) -> float:
    return math.sqrt(float(np.sum(weights * residuals * residuals)) / float(np.sum(weights)))


def fit_ea_fixed_params(curve: ReferenceCurve, params: PropagationParams) -> EaFit:
    """
    Least-squares ea for one curve with C and e held fixed.

    Returns:
        EaFit(ea_db_per_m, rms_db) with rms the root-mean-square residual
        at the optimum

    Raises:
        NonFiniteInputError: If a sample is NaN or infinite
        DegenerateCurveError: If sum(w*r^2) == 0
    """
    _check_finite(curve)
    ea, residuals = _closed_form(curve, params)
    return EaFit(ea_db_per_m=ea, rms_db=_rms(residuals, curve.sample_weights))


def evaluate_residuals(
    curve: ReferenceCurve,
    params: PropagationParams,
    ea_db_per_m: float,
) -> np.ndarray:
    """Residuals ``model(r_k) - F_k`` in dB, one per sample."""
    return homogeneous_model(curve.r_m, params, ea_db_per_m) - curve.field_dbuvm


def fit_ea_table(curves: Sequence[ReferenceCurve], params: PropagationParams) -> EaTable:
    """Per-conductivity ea at fixed (C, e), as an ea table sorted by conductivity."""
    if not curves:
        raise NoCurvesError("No reference curves given")
    rows = sorted((c.sigma_s_per_m, fit_ea_fixed_params(c, params).ea_db_per_m) for c in curves)
    return EaTable(rows=tuple(rows))


# ============================================================================
# Global (C, e) search
# ============================================================================

class _PooledCurves:
    """All curves concatenated, for vectorized profile SSE evaluation."""

    def __init__(self, curves: Sequence[ReferenceCurve]):
        self.n_curves = len(curves)
        self.index = np.concatenate([np.full(len(c), i) for i, c in enumerate(curves)])
        self.r = np.concatenate([c.r_m for c in curves])
        self.log_r = np.log10(self.r)
        self.field = np.concatenate([c.field_dbuvm for c in curves])
        self.w = np.concatenate([c.sample_weights for c in curves])
        self.rr = np.bincount(self.index, weights=self.w * self.r * self.r, minlength=self.n_curves)
        if np.any(self.rr == 0):
            raise DegenerateCurveError("A curve has sum(w*r^2) == 0")

    def residuals(self, c: float, e: float) -> Tuple[np.ndarray, np.ndarray]:
        d = c - 10.0 * e * self.log_r - self.field
        ea = np.bincount(self.index, weights=self.w * d * self.r, minlength=self.n_curves) / self.rr
        return ea, d - ea[self.index] * self.r

    def sse(self, c: float, e: float) -> float:
        _, res = self.residuals(c, e)
        return float(np.sum(self.w * res * res))


def _grid_row(pooled: _PooledCurves, c: float, e_values: np.ndarray) -> np.ndarray:
    return np.array([pooled.sse(c, e) for e in e_values])


def profile_sse(curves: Sequence[ReferenceCurve], params: PropagationParams) -> float:
    """Pooled SSE with every curve's ea at its closed-form optimum."""
    return _PooledCurves(curves).sse(params.c_dbuvm, params.e_exponent)


def fit_global(
    curves: Sequence[ReferenceCurve],
    search: Optional[SearchConfig] = None,
) -> FitResult:
    """
    Jointly estimate C and e over all curves, with per-curve ea profiled out.

    A coarse grid over the search bounds picks the start (ties go to the
    smaller C, then the smaller e); Nelder-Mead then refines in coordinates
    normalized to the bounds, restarting until the SSE improves by less than
    ``rel_tol`` relative.

    Raises:
        NoCurvesError: If curves is empty
        NonFiniteInputError: If any sample is NaN or infinite
        FitDivergedError: If the optimum has an exponent outside (0, 4)
    """
    if not curves:
        raise NoCurvesError("No reference curves given")
    search = search or SearchConfig()
    for curve in curves:
        _check_finite(curve)

    pooled = _PooledCurves(curves)
    c_values = np.linspace(search.c_min, search.c_max, search.c_steps)
    e_values = np.linspace(search.e_min, search.e_max, search.e_steps)

    if search.n_jobs == 1:
        rows = [_grid_row(pooled, c, e_values) for c in c_values]
    else:
        rows = Parallel(n_jobs=search.n_jobs)(delayed(_grid_row)(pooled, c, e_values) for c in c_values)
    grid = np.vstack(rows)
    i, j = np.unravel_index(int(np.argmin(grid)), grid.shape)
    grid_best = (float(c_values[i]), float(e_values[j]))
    logger.info(f"Grid search best C={grid_best[0]:.3f} e={grid_best[1]:.4f} SSE={grid[i, j]:.6g}")

    c_span = search.c_max - search.c_min
    e_span = search.e_max - search.e_min

    def objective(x: np.ndarray) -> float:
        return pooled.sse(search.c_min + x[0] * c_span, search.e_min + x[1] * e_span)

    x_best = np.array([(grid_best[0] - search.c_min) / c_span, (grid_best[1] - search.e_min) / e_span])
    f_best = float(grid[i, j])
    scale = np.array([1.0 / (search.c_steps - 1), 1.0 / (search.e_steps - 1)])
    iterations = 0

    for attempt in range(search.max_restarts):
        simplex = np.array([x_best, x_best + [scale[0], 0.0], x_best + [0.0, scale[1]]])
        result = minimize(
            objective,
            x_best,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": 1e-13,
                "fatol": search.rel_tol * 1e-3 * max(f_best, _SSE_FLOOR),
                "maxiter": search.max_iter,
            },
        )
        iterations += int(result.nit)
        f_new = float(result.fun)
        improvement = f_best - f_new
        if f_new < f_best:
            x_best, f_best = np.array(result.x, dtype=float), f_new
        logger.debug(f"Nelder-Mead run {attempt + 1}: SSE={f_new:.6g} nit={result.nit}")

        if f_best <= _SSE_FLOOR or improvement <= search.rel_tol * max(f_best + improvement, _SSE_FLOOR):
            break
        scale = np.maximum(scale * 0.1, 1e-9)

    try:
        params = PropagationParams(
            c_dbuvm=float(search.c_min + x_best[0] * c_span),
            e_exponent=float(search.e_min + x_best[1] * e_span),
        )
    except InvalidParamsError as e:
        labels = ", ".join(curve.source_label or f"curve {k}" for k, curve in enumerate(curves))
        raise FitDivergedError(f"No valid optimum: {e}", source_label=labels) from e
    ea, residuals = pooled.residuals(params.c_dbuvm, params.e_exponent)

    rms_by_curve = []
    for k, curve in enumerate(curves):
        mask = pooled.index == k
        rms_by_curve.append(_rms(residuals[mask], pooled.w[mask]))

    result = FitResult(
        params=params,
        ea_by_sigma=[(curve.sigma_s_per_m, float(ea[k])) for k, curve in enumerate(curves)],
        rms_by_curve=rms_by_curve,
        pooled_rms_db=_rms(residuals, pooled.w),
        iterations=iterations,
        sse=float(np.sum(pooled.w * residuals * residuals)),
        grid_best=grid_best,
        source_labels=[curve.source_label for curve in curves],
    )
    logger.info(
        f"Fit converged: C={params.c_dbuvm:.6f} e={params.e_exponent:.6f} "
        f"pooled rms={result.pooled_rms_db:.3e} dB after {iterations} iterations"
    )
    return result
