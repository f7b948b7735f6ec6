"""
Path-integrated extra attenuation over a heterogeneous conductivity raster.

The great circle from transmitter to receiver is cut into equal steps no
longer than the step size. Each step is attributed to the raster cell that
contains its midpoint; consecutive steps in the same cell merge into one
segment. Steps outside the raster or on NoData cells use a fallback
conductivity (sea water by default) unless the tracer is strict.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from ..conductivity.ea_table import EaTable, ea_for_sigma, ea_for_sigmas
from ..conductivity.raster import CellStatus, ConductivityRaster
from ..core.exceptions import (
    BelowMinRangeError,
    DegeneratePathError,
    NoDataCellError,
    NotInTableError,
    OutsideRasterError,
)
from ..core.logging import get_logger
from ..core.types import EaPolicy, PropagationParams
from ..geo import GeoPoint, great_circle_distance, great_circle_points, path_step_count
from .model import NEAR_FIELD_LIMIT_M, R_MIN_M, Transmitter, homogeneous_model

logger = get_logger(__name__)

# Sea water.
DEFAULT_FALLBACK_SIGMA = 4.0


@dataclass(frozen=True)
class PathSegment:
    """
    Run of consecutive path steps inside one raster cell.

    Attributes:
        row: Raster row, -1 when outside the raster
        col: Raster column, -1 when outside the raster
        sigma: Conductivity used for the segment, S/m
        ea_db_per_m: Extra attenuation per meter
        length_m: Segment length
        fallback: True when the fallback conductivity was used
    """
    row: int
    col: int
    sigma: float
    ea_db_per_m: float
    length_m: float
    fallback: bool = False

    @property
    def extra_atten_db(self) -> float:
        return self.ea_db_per_m * self.length_m


@dataclass(frozen=True)
class PathProfile:
    """
    Decomposition of a path into per-cell segments.

    Attributes:
        total_r_m: Great-circle length of the path
        segments: Segments in travel order
        extra_atten_db: Sum of ea * length over the segments
        step_m: Length of one sampling step
        fallback_steps: Number of steps that used the fallback conductivity
    """
    total_r_m: float
    segments: Tuple[PathSegment, ...]
    extra_atten_db: float
    step_m: float
    fallback_steps: int = 0

    @property
    def fallback_cells(self) -> int:
        """Fallback segments: each NoData cell crossed, plus each stretch outside the raster."""
        return sum(1 for seg in self.segments if seg.fallback)


@dataclass(frozen=True)
class PathPrediction:
    """
    Field strength at a receiver with its path diagnostics.

    ``fallback_cells`` counts the fallback segments of the path (see
    ``PathProfile.fallback_cells``); ``fallback_steps`` counts sampling steps.
    """
    r_m: float
    extra_atten_db: float
    field_dbuvm: float
    fallback_steps: int
    near_field: bool
    profile: Optional[PathProfile] = None
    fallback_cells: int = 0


def default_step_m(raster: ConductivityRaster) -> float:
    """A quarter of the smaller cell dimension, in meters, at the raster's center latitude."""
    ns, ew = raster.geometry.cell_dimensions_m()
    return min(ns, ew) / 4.0


class PathTracer:
    """
    Traces paths over one raster and ea table.

    The ea of every raster cell is resolved once at construction, so a
    tracer can be reused for many receivers (coverage sweeps). Instances hold
    no mutable state after construction and can be shared across workers.

    Example:
        >>> tracer = PathTracer(raster, EaTable.default())
        >>> profile = tracer.trace(tx_point, rx_point)
    """

    def __init__(
        self,
        raster: ConductivityRaster,
        table: EaTable,
        policy: Union[EaPolicy, str] = EaPolicy.LOGLIN_INTERP,
        max_step_m: Optional[float] = None,
        fallback_sigma: Optional[float] = DEFAULT_FALLBACK_SIGMA,
    ):
        """
        Initialize the tracer.

        Args:
            raster: Ground conductivity
            table: Conductivity to ea table
            policy: ea lookup policy; ``exact_only`` also disables the fallback
            max_step_m: Sampling step (default: ``default_step_m(raster)``)
            fallback_sigma: Conductivity for steps outside the raster or on
                NoData cells; None disables the fallback
        """
        self.raster = raster
        self.table = table
        self.policy = EaPolicy(policy)
        self.step_m = float(max_step_m) if max_step_m is not None else default_step_m(raster)
        if not self.step_m > 0:
            raise ValueError(f"max_step_m must be > 0, got {max_step_m!r}")

        self.strict = self.policy is EaPolicy.EXACT_ONLY or fallback_sigma is None
        self.fallback_sigma = None if self.strict else float(fallback_sigma)
        self.fallback_ea = (
            None if self.fallback_sigma is None
            else ea_for_sigma(self.fallback_sigma, table, self.policy)
        )
        self._ea_grid = self._resolve_ea_grid()

    def _resolve_ea_grid(self) -> np.ndarray:
        """ea per raster cell; NaN for NoData cells and conductivities the policy rejects."""
        cells = self.raster.cells
        valid = ~self.raster.nodata_mask()
        ea_grid = np.full(cells.shape, np.nan)
        ea_grid[valid] = ea_for_sigmas(cells[valid], self.table, self.policy, fill_missing=np.nan)
        return ea_grid

    def _raise_strict(self, lats, lons, rows, cols, status, index: int) -> None:
        if status[index] == CellStatus.OUTSIDE:
            raise OutsideRasterError(float(lats[index]), float(lons[index]))
        raise NoDataCellError(int(rows[index]), int(cols[index]))

    def trace(self, tx: GeoPoint, rx: GeoPoint) -> PathProfile:
        """
        Decompose the path from tx to rx into per-cell segments.

        Raises:
            DegeneratePathError: If tx and rx coincide
            AntipodalPathError: If tx and rx are antipodal
            OutsideRasterError, NoDataCellError: In strict mode
            NotInTableError: If a crossed cell's conductivity is not a table row
                under ``exact_only``
        """
        distance = great_circle_distance(tx, rx)
        if distance == 0.0:
            raise DegeneratePathError(f"Transmitter and receiver coincide at {tx}")

        n = path_step_count(distance, self.step_m)
        step = distance / n
        fractions = (np.arange(n, dtype=float) + 0.5) / n
        lats, lons = great_circle_points(tx, rx, fractions)

        lookup = self.raster.locate(lats, lons)
        status = lookup.status
        inside = status != CellStatus.OUTSIDE
        ok = status == CellStatus.OK
        fallback = ~ok

        if self.strict and fallback.any():
            self._raise_strict(lats, lons, lookup.rows, lookup.cols, status, int(np.argmax(fallback)))

        rows = np.where(inside, lookup.rows, -1)
        cols = np.where(inside, lookup.cols, -1)

        eas = np.full(n, np.nan)
        eas[ok] = self._ea_grid[rows[ok], cols[ok]]
        missing = ok & np.isnan(eas)
        if missing.any():
            index = int(np.argmax(missing))
            raise NotInTableError(float(lookup.values[index]))

        sigmas = np.where(ok, lookup.values, np.nan)
        if fallback.any():
            eas[fallback] = self.fallback_ea
            sigmas[fallback] = self.fallback_sigma

        change = np.ones(n, dtype=bool)
        change[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1]) | (fallback[1:] != fallback[:-1])
        starts = np.flatnonzero(change)
        ends = np.append(starts[1:], n)

        segments = tuple(
            PathSegment(
                row=int(rows[s]),
                col=int(cols[s]),
                sigma=float(sigmas[s]),
                ea_db_per_m=float(eas[s]),
                length_m=(e - s) * step,
                fallback=bool(fallback[s]),
            )
            for s, e in zip(starts, ends)
        )
        extra = math.fsum(seg.ea_db_per_m * seg.length_m for seg in segments)
        fallback_steps = int(fallback.sum())
        if fallback_steps:
            logger.debug(f"Path {tx} -> {rx}: {fallback_steps}/{n} steps used fallback sigma {self.fallback_sigma}")

        return PathProfile(
            total_r_m=distance,
            segments=segments,
            extra_atten_db=extra,
            step_m=step,
            fallback_steps=fallback_steps,
        )

    def ea_at(self, p: GeoPoint) -> Tuple[float, bool]:
        """
        ea of the cell containing p.

        Returns:
            Tuple of (ea_db_per_m, fallback_used)
        """
        lookup = self.raster.locate(np.array([p.lat_deg]), np.array([p.lon_deg]))
        status = int(lookup.status[0])
        if status == CellStatus.OK:
            ea = float(self._ea_grid[lookup.rows[0], lookup.cols[0]])
            if math.isnan(ea):
                raise NotInTableError(float(lookup.values[0]))
            return ea, False
        if self.strict:
            self._raise_strict(
                np.array([p.lat_deg]), np.array([p.lon_deg]), lookup.rows, lookup.cols, lookup.status, 0
            )
        return float(self.fallback_ea), True

    def predict(
        self,
        tx: Transmitter,
        rx: GeoPoint,
        params: PropagationParams,
        clamp_min_range: bool = False,
    ) -> PathPrediction:
        """
        Field strength at rx from tx.

        Args:
            tx: Transmitter (its power offset is added to C)
            rx: Receiver position
            params: Model constants
            clamp_min_range: Evaluate receivers closer than 1 m at 1 m using
                the ea of the transmitter's cell instead of raising

        Raises:
            DegeneratePathError: If rx coincides with tx and clamping is off
            BelowMinRangeError: If 0 < r < 1 m and clamping is off
        """
        distance = great_circle_distance(tx.location, rx)

        if distance < R_MIN_M:
            if not clamp_min_range:
                if distance == 0.0:
                    raise DegeneratePathError(f"Transmitter and receiver coincide at {rx}")
                raise BelowMinRangeError(distance, R_MIN_M)
            ea, used_fallback = self.ea_at(tx.location)
            extra = ea * R_MIN_M
            field = float(homogeneous_model(R_MIN_M, params, ea)) + tx.power_offset_db
            return PathPrediction(
                r_m=distance,
                extra_atten_db=extra,
                field_dbuvm=field,
                fallback_steps=int(used_fallback),
                near_field=True,
                fallback_cells=int(used_fallback),
            )

        profile = self.trace(tx.location, rx)
        field = (
            params.c_dbuvm
            + tx.power_offset_db
            - 10.0 * params.e_exponent * math.log10(distance)
            - profile.extra_atten_db
        )
        near_field = distance < NEAR_FIELD_LIMIT_M
        if near_field:
            logger.debug(f"Receiver {rx} is {distance:.1f} m from {tx.id}; near-field result is advisory")
        return PathPrediction(
            r_m=distance,
            extra_atten_db=profile.extra_atten_db,
            field_dbuvm=field,
            fallback_steps=profile.fallback_steps,
            near_field=near_field,
            profile=profile,
            fallback_cells=profile.fallback_cells,
        )


def trace_path(
    tx: GeoPoint,
    rx: GeoPoint,
    raster: ConductivityRaster,
    table: EaTable,
    max_step_m: Optional[float] = None,
    policy: Union[EaPolicy, str] = EaPolicy.LOGLIN_INTERP,
    fallback_sigma: Optional[float] = DEFAULT_FALLBACK_SIGMA,
) -> PathProfile:
    """Per-cell decomposition of the tx-rx great circle; see ``PathTracer.trace``."""
    tracer = PathTracer(raster, table, policy=policy, max_step_m=max_step_m, fallback_sigma=fallback_sigma)
    return tracer.trace(tx, rx)


def predict_path(
    tx: Transmitter,
    rx: GeoPoint,
    raster: ConductivityRaster,
    table: EaTable,
    params: PropagationParams,
    max_step_m: Optional[float] = None,
    policy: Union[EaPolicy, str] = EaPolicy.LOGLIN_INTERP,
    fallback_sigma: Optional[float] = DEFAULT_FALLBACK_SIGMA,
) -> PathPrediction:
    """Field strength at rx with distance, extra attenuation and fallback diagnostics."""
    tracer = PathTracer(raster, table, policy=policy, max_step_m=max_step_m, fallback_sigma=fallback_sigma)
    return tracer.predict(tx, rx, params)


def field_strength_path(
    tx: Transmitter,
    rx: GeoPoint,
    raster: ConductivityRaster,
    table: EaTable,
    params: PropagationParams,
    max_step_m: Optional[float] = None,
    policy: Union[EaPolicy, str] = EaPolicy.LOGLIN_INTERP,
    fallback_sigma: Optional[float] = DEFAULT_FALLBACK_SIGMA,
) -> float:
    """
    Field strength in dB(uV/m) over a heterogeneous path:
    ``C + power_offset - 10*e*log10(r) - sum(ea_i * r_i)``.

    Raises:
        DegeneratePathError: If tx and rx coincide
        BelowMinRangeError: If r < 1 m
    """
    return predict_path(tx, rx, raster, table, params, max_step_m, policy, fallback_sigma).field_dbuvm
