"""
Field-strength sweep over a lat/lon grid around one transmitter.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from ..conductivity.ea_table import EaTable
from ..conductivity.raster import ConductivityRaster, RasterGeometry
from ..core.exceptions import InvalidGridSpecError, RModeError
from ..core.logging import get_logger
from ..core.types import EaPolicy, PropagationParams
from ..geo import GeoPoint
from ..propagation.model import Transmitter
from ..propagation.path import DEFAULT_FALLBACK_SIGMA, PathTracer

logger = get_logger(__name__)

# Cell counts along an axis must come out integral within this fraction.
_SPAN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """
    Output grid placement. Row 0 is the southernmost row.

    Attributes:
        lat_min: Southern edge, degrees
        lon_min: Western edge, degrees
        cell_size_deg: Cell edge length, degrees
        n_rows: Rows (south to north)
        n_cols: Columns (west to east)
    """
    lat_min: float
    lon_min: float
    cell_size_deg: float
    n_rows: int
    n_cols: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.cell_size_deg) and self.cell_size_deg > 0):
            raise InvalidGridSpecError(f"cell_size_deg must be > 0, got {self.cell_size_deg!r}")
        if int(self.n_rows) != self.n_rows or int(self.n_cols) != self.n_cols:
            raise InvalidGridSpecError("n_rows and n_cols must be integers")
        if self.n_rows < 1 or self.n_cols < 1:
            raise InvalidGridSpecError(f"Grid must have at least one cell, got {self.n_rows}x{self.n_cols}")
        if not (math.isfinite(self.lat_min) and math.isfinite(self.lon_min)):
            raise InvalidGridSpecError("Grid origin must be finite")
        if self.lat_min < -90.0 or self.lat_max > 90.0 + _SPAN_TOLERANCE:
            raise InvalidGridSpecError(f"Grid latitude span [{self.lat_min}, {self.lat_max}] exceeds [-90, 90]")
        if self.n_cols * self.cell_size_deg > 360.0 + _SPAN_TOLERANCE:
            raise InvalidGridSpecError("Grid spans more than 360 degrees of longitude")

    @classmethod
    def from_bounds(
        cls,
        lat_min: float,
        lat_max: float,
        lon_min: float,
        lon_max: float,
        cell_size_deg: float,
    ) -> "GridSpec":
        """
        Grid covering [lat_min, lat_max] x [lon_min, lon_max].

        Raises:
            InvalidGridSpecError: If a span is not a whole number of cells
        """
        if not (math.isfinite(cell_size_deg) and cell_size_deg > 0):
            raise InvalidGridSpecError(f"cell_size_deg must be > 0, got {cell_size_deg!r}")
        counts = []
        for name, lo, hi in (("latitude", lat_min, lat_max), ("longitude", lon_min, lon_max)):
            cells = (hi - lo) / cell_size_deg
            n = round(cells)
            if n < 1 or abs(cells - n) > _SPAN_TOLERANCE * max(1.0, cells):
                raise InvalidGridSpecError(
                    f"{name} span [{lo}, {hi}] is not a positive whole number of {cell_size_deg} degree cells"
                )
            counts.append(int(n))
        return cls(lat_min=lat_min, lon_min=lon_min, cell_size_deg=cell_size_deg, n_rows=counts[0], n_cols=counts[1])

    @property
    def lat_max(self) -> float:
        return self.lat_min + self.n_rows * self.cell_size_deg

    @property
    def lon_max(self) -> float:
        return self.lon_min + self.n_cols * self.cell_size_deg

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        """(lat_min, lat_max, lon_min, lon_max)"""
        return (self.lat_min, self.lat_max, self.lon_min, self.lon_max)

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.n_rows), int(self.n_cols))

    def cell_center(self, row: int, col: int) -> GeoPoint:
        return GeoPoint(
            self.lat_min + (row + 0.5) * self.cell_size_deg,
            self.lon_min + (col + 0.5) * self.cell_size_deg,
        )

    def center_lats(self) -> np.ndarray:
        return self.lat_min + (np.arange(self.n_rows) + 0.5) * self.cell_size_deg

    def center_lons(self) -> np.ndarray:
        return self.lon_min + (np.arange(self.n_cols) + 0.5) * self.cell_size_deg

    def to_geometry(self) -> RasterGeometry:
        """Same placement as a raster geometry (for ESRI ASCII export)."""
        return RasterGeometry(
            origin_lat_deg=self.lat_min,
            origin_lon_deg=self.lon_min,
            cell_size_deg=self.cell_size_deg,
            n_rows=int(self.n_rows),
            n_cols=int(self.n_cols),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lat_min": self.lat_min,
            "lon_min": self.lon_min,
            "cell_size_deg": self.cell_size_deg,
            "n_rows": int(self.n_rows),
            "n_cols": int(self.n_cols),
        }


@dataclass
class CoverageGrid:
    """
    Predicted field strength per grid cell.

    Attributes:
        spec: Grid placement
        values: (n_rows, n_cols) field strengths in dB(uV/m), row 0 southernmost;
            NaN marks cells whose prediction failed
        metadata: Run provenance and summary counts
    """
    spec: GridSpec
    values: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != self.spec.shape:
            raise InvalidGridSpecError(f"Values shape {values.shape} does not match grid {self.spec.shape}")
        if np.isinf(values).any():
            raise ValueError("Coverage values must be finite or NaN")
        self.values = values

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        return self.spec.bounds

    @property
    def cell_size_deg(self) -> float:
        return self.spec.cell_size_deg

    @property
    def n_rows(self) -> int:
        return int(self.spec.n_rows)

    @property
    def n_cols(self) -> int:
        return int(self.spec.n_cols)

    def summary(self) -> Dict[str, Any]:
        """Min/max field and diagnostic counts."""
        valid = self.values[~np.isnan(self.values)]
        return {
            "cells": int(self.values.size),
            "min_field_dbuvm": float(valid.min()) if valid.size else None,
            "max_field_dbuvm": float(valid.max()) if valid.size else None,
            "failed_cells": int(self.metadata.get("failed_cells", int(np.isnan(self.values).sum()))),
            "fallback_cells": int(self.metadata.get("fallback_cells", 0)),
            "near_field_cells": int(self.metadata.get("near_field_cells", 0)),
        }


class _RowResult(NamedTuple):
    values: np.ndarray
    fallback_steps: int
    fallback_cells: int
    near_field_cells: int
    failures: List[str]


def _sweep_row(
    tracer: PathTracer,
    tx: Transmitter,
    params: PropagationParams,
    spec: GridSpec,
    row: int,
) -> _RowResult:
    values = np.full(spec.n_cols, np.nan)
    fallback_steps = fallback_cells = near_field_cells = 0
    failures: List[str] = []

    for col in range(spec.n_cols):
        rx = spec.cell_center(row, col)
        try:
            prediction = tracer.predict(tx, rx, params, clamp_min_range=True)
        except RModeError as e:
            failures.append(f"({row}, {col}): {e}")
            continue
        values[col] = prediction.field_dbuvm
        fallback_steps += prediction.fallback_steps
        fallback_cells += int(prediction.fallback_steps > 0)
        near_field_cells += int(prediction.near_field)

    return _RowResult(values, fallback_steps, fallback_cells, near_field_cells, failures)


def compute_coverage(
    tx: Transmitter,
    raster: ConductivityRaster,
    table: EaTable,
    params: PropagationParams,
    grid_spec: GridSpec,
    max_step_m: Optional[float] = None,
    policy: Union[EaPolicy, str] = EaPolicy.LOGLIN_INTERP,
    fallback_sigma: Optional[float] = DEFAULT_FALLBACK_SIGMA,
    n_jobs: int = 1,
) -> CoverageGrid:
    """
    Field strength at every cell center of ``grid_spec``.

    Cells within 1 m of the transmitter are evaluated at 1 m. A cell whose
    prediction raises is stored as NaN and counted in ``failed_cells``; the
    sweep continues. Rows are distributed over ``n_jobs`` joblib workers;
    results do not depend on the worker count.

    Raises:
        InvalidGridSpecError: If grid_spec is not a GridSpec
    """
    if not isinstance(grid_spec, GridSpec):
        raise InvalidGridSpecError(f"Expected a GridSpec, got {type(grid_spec).__name__}")

    tracer = PathTracer(raster, table, policy=policy, max_step_m=max_step_m, fallback_sigma=fallback_sigma)
    logger.info(
        f"Coverage sweep for {tx.id}: {grid_spec.n_rows}x{grid_spec.n_cols} cells, "
        f"step {tracer.step_m:.1f} m, policy {tracer.policy.value}, n_jobs={n_jobs}"
    )

    started = time.perf_counter()
    if n_jobs == 1:
        rows = [_sweep_row(tracer, tx, params, grid_spec, row) for row in range(grid_spec.n_rows)]
    else:
        rows = Parallel(n_jobs=n_jobs)(
            delayed(_sweep_row)(tracer, tx, params, grid_spec, row) for row in range(grid_spec.n_rows)
        )
    elapsed = time.perf_counter() - started

    values = np.vstack([r.values for r in rows])
    failures = [msg for r in rows for msg in r.failures]
    for msg in failures[:5]:
        logger.warning(f"Coverage cell failed {msg}")
    if len(failures) > 5:
        logger.warning(f"... {len(failures) - 5} more failed cells")

    metadata = {
        "transmitter": tx.to_dict(),
        "params": params.to_dict(),
        "ea_table_hash": table.content_hash(),
        "max_step_m": tracer.step_m,
        "policy": tracer.policy.value,
        "fallback_sigma": tracer.fallback_sigma,
        "grid": grid_spec.to_dict(),
        "failed_cells": len(failures),
        "fallback_cells": sum(r.fallback_cells for r in rows),
        "fallback_steps": sum(r.fallback_steps for r in rows),
        "near_field_cells": sum(r.near_field_cells for r in rows),
    }
    grid = CoverageGrid(spec=grid_spec, values=values, metadata=metadata)
    summary = grid.summary()
    logger.info(
        f"Coverage done in {elapsed:.2f} s: field {summary['min_field_dbuvm']} .. {summary['max_field_dbuvm']} dB(uV/m), "
        f"{summary['failed_cells']} failed, {summary['fallback_cells']} used fallback"
    )
    return grid
