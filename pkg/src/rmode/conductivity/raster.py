"""
Lat/lon-gridded rasters: geometry, ground-conductivity and land-cover grids,
and the ESRI ASCII / CSV matrix readers and writers.

Internally row 0 is the southernmost row. Files store the northernmost row
first, so readers and writers flip the row order.
"""

import io
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path
from typing import BinaryIO, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from ..core.exceptions import (
    InvalidConductivityError,
    NoDataCellError,
    OutsideRasterError,
    ParseError,
)
from ..core.logging import get_logger
from ..core.utils import format_float
from ..geo import EARTH_RADIUS_M, GeoPoint

logger = get_logger(__name__)

DEFAULT_NODATA = -9999.0

# Slack allowed when checking that a raster's far edges stay on the globe.
_BOUNDS_TOLERANCE_DEG = 1e-9

RasterSource = Union[bytes, bytearray, str, Path, BinaryIO]


class RasterFormat(str, Enum):
    """Supported raster text formats."""
    ESRI_ASCII = "esri_ascii"
    CSV_MATRIX = "csv_matrix"


class CellStatus(IntEnum):
    """Result of locating a point in a raster."""
    OK = 0
    OUTSIDE = 1
    NODATA = 2


class CellHit(NamedTuple):
    """Raster cell containing a point."""
    row: int
    col: int
    sigma: float


class RasterLookup(NamedTuple):
    """Vectorized lookup result; ``values`` is NaN where status is not OK."""
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    status: np.ndarray


@dataclass(frozen=True)
class RasterGeometry:
    """
    Placement of a regular lat/lon grid.

    Attributes:
        origin_lat_deg: Latitude of the lower-left (south-west) corner
        origin_lon_deg: Longitude of the lower-left corner
        cell_size_deg: Cell edge length in degrees (square cells)
        n_rows: Number of rows (south to north)
        n_cols: Number of columns (west to east)
    """
    origin_lat_deg: float
    origin_lon_deg: float
    cell_size_deg: float
    n_rows: int
    n_cols: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.cell_size_deg) and self.cell_size_deg > 0):
            raise ValueError(f"cell_size_deg must be > 0, got {self.cell_size_deg!r}")
        if int(self.n_rows) != self.n_rows or int(self.n_cols) != self.n_cols:
            raise ValueError("n_rows and n_cols must be integers")
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError(f"Raster must have at least one cell, got {self.n_rows}x{self.n_cols}")
        if self.origin_lat_deg < -90.0 or self.top_lat_deg > 90.0 + _BOUNDS_TOLERANCE_DEG:
            raise ValueError(
                f"Raster latitude span [{self.origin_lat_deg}, {self.top_lat_deg}] exceeds [-90, 90]"
            )
        if self.origin_lon_deg < -180.0 or self.right_lon_deg > 180.0 + _BOUNDS_TOLERANCE_DEG:
            raise ValueError(
                f"Raster longitude span [{self.origin_lon_deg}, {self.right_lon_deg}] exceeds [-180, 180]"
            )

    @property
    def top_lat_deg(self) -> float:
        return self.origin_lat_deg + self.n_rows * self.cell_size_deg

    @property
    def right_lon_deg(self) -> float:
        return self.origin_lon_deg + self.n_cols * self.cell_size_deg

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.n_rows), int(self.n_cols))

    def cell_center(self, row: int, col: int) -> GeoPoint:
        """Center of cell (row, col)."""
        return GeoPoint(
            self.origin_lat_deg + (row + 0.5) * self.cell_size_deg,
            self.origin_lon_deg + (col + 0.5) * self.cell_size_deg,
        )

    def cell_dimensions_m(self) -> Tuple[float, float]:
        """(north-south, east-west) cell size in meters at the raster's center latitude."""
        center_lat = self.origin_lat_deg + 0.5 * self.n_rows * self.cell_size_deg
        ns = EARTH_RADIUS_M * math.radians(self.cell_size_deg)
        ew = ns * math.cos(math.radians(center_lat))
        return ns, ew

    def locate(self, lats: np.ndarray, lons: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Map coordinates to cell indices using half-open cell extents.

        Returns:
            Tuple of (rows, cols, inside) arrays
        """
        lats = np.asarray(lats, dtype=float)
        lons = np.asarray(lons, dtype=float)
        rows = np.floor((lats - self.origin_lat_deg) / self.cell_size_deg).astype(np.int64)
        cols = np.floor((lons - self.origin_lon_deg) / self.cell_size_deg).astype(np.int64)
        inside = (rows >= 0) & (rows < self.n_rows) & (cols >= 0) & (cols < self.n_cols)
        return rows, cols, inside


def _nodata_mask(cells: np.ndarray, nodata_value: float) -> np.ndarray:
    if math.isnan(nodata_value):
        return np.isnan(cells)
    return cells == nodata_value


def _as_grid(cells, geometry: RasterGeometry) -> np.ndarray:
    grid = np.array(cells, dtype=float)
    if grid.ndim == 1:
        if grid.size != geometry.n_rows * geometry.n_cols:
            raise ValueError(
                f"Expected {geometry.n_rows * geometry.n_cols} cells, got {grid.size}"
            )
        grid = grid.reshape(geometry.shape)
    if grid.shape != geometry.shape:
        raise ValueError(f"Cell array shape {grid.shape} does not match geometry {geometry.shape}")
    grid.setflags(write=False)
    return grid


@dataclass(frozen=True, eq=False)
class ConductivityRaster:
    """
    Ground conductivity (S/m) on a lat/lon grid.

    Attributes:
        geometry: Grid placement
        cells: Conductivities, shape (n_rows, n_cols), row 0 southernmost; read-only
        nodata_value: Sentinel marking cells without data
    """
    geometry: RasterGeometry
    cells: np.ndarray
    nodata_value: float = DEFAULT_NODATA

    def __post_init__(self) -> None:
        grid = _as_grid(self.cells, self.geometry)
        valid = grid[~_nodata_mask(grid, self.nodata_value)]
        bad = valid[~(np.isfinite(valid) & (valid > 0))]
        if bad.size:
            raise InvalidConductivityError(
                f"Conductivity must be > 0 S/m, found {float(bad[0])!r}"
            )
        object.__setattr__(self, "cells", grid)

    @classmethod
    def uniform(
        cls,
        sigma: float,
        origin_lat_deg: float = -90.0,
        origin_lon_deg: float = -180.0,
        cell_size_deg: float = 1.0,
        n_rows: int = 180,
        n_cols: int = 360,
    ) -> "ConductivityRaster":
        """Raster with the same conductivity everywhere (whole globe by default)."""
        geometry = RasterGeometry(origin_lat_deg, origin_lon_deg, cell_size_deg, n_rows, n_cols)
        return cls(geometry=geometry, cells=np.full(geometry.shape, float(sigma)))

    @property
    def origin_lat_deg(self) -> float:
        return self.geometry.origin_lat_deg

    @property
    def origin_lon_deg(self) -> float:
        return self.geometry.origin_lon_deg

    @property
    def cell_size_deg(self) -> float:
        return self.geometry.cell_size_deg

    @property
    def n_rows(self) -> int:
        return self.geometry.n_rows

    @property
    def n_cols(self) -> int:
        return self.geometry.n_cols

    def nodata_mask(self) -> np.ndarray:
        return _nodata_mask(self.cells, self.nodata_value)

    def locate(self, lats: np.ndarray, lons: np.ndarray) -> RasterLookup:
        """Vectorized cell lookup with per-point status codes."""
        rows, cols, inside = self.geometry.locate(lats, lons)
        values = np.full(rows.shape, np.nan)
        status = np.full(rows.shape, int(CellStatus.OUTSIDE), dtype=np.int8)

        found = self.cells[rows[inside], cols[inside]]
        is_nodata = _nodata_mask(found, self.nodata_value)
        found = np.where(is_nodata, np.nan, found)
        values[inside] = found
        status[inside] = np.where(is_nodata, int(CellStatus.NODATA), int(CellStatus.OK))
        return RasterLookup(rows=rows, cols=cols, values=values, status=status)


@dataclass(frozen=True, eq=False)
class LandCoverRaster:
    """
    Integer land-cover class codes on a lat/lon grid.

    Attributes:
        geometry: Grid placement
        cells: Class codes stored as floats, shape (n_rows, n_cols); read-only
        nodata_value: Sentinel marking cells without a class
    """
    geometry: RasterGeometry
    cells: np.ndarray
    nodata_value: float = DEFAULT_NODATA

    def __post_init__(self) -> None:
        grid = _as_grid(self.cells, self.geometry)
        valid = grid[~_nodata_mask(grid, self.nodata_value)]
        if valid.size and not np.all(np.isfinite(valid) & (valid == np.round(valid))):
            raise ValueError("Land-cover class codes must be integers")
        object.__setattr__(self, "cells", grid)

    def nodata_mask(self) -> np.ndarray:
        return _nodata_mask(self.cells, self.nodata_value)


def cell_at(raster: ConductivityRaster, p: GeoPoint) -> CellHit:
    """
    Find the raster cell containing a point.

    Cell extents are half-open: [origin + k*cell, origin + (k+1)*cell).

    Raises:
        OutsideRasterError: If the point is beyond the raster bounds
        NoDataCellError: If the cell holds the NoData sentinel
    """
    rows, cols, inside = raster.geometry.locate(np.array([p.lat_deg]), np.array([p.lon_deg]))
    if not inside[0]:
        raise OutsideRasterError(p.lat_deg, p.lon_deg)

    row, col = int(rows[0]), int(cols[0])
    sigma = float(raster.cells[row, col])
    if _nodata_mask(np.array([sigma]), raster.nodata_value)[0]:
        raise NoDataCellError(row, col)
    return CellHit(row=row, col=col, sigma=sigma)


# ============================================================================
# Reading
# ============================================================================

_ESRI_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "xllcenter", "yllcenter", "cellsize", "nodata_value")


def read_source_text(source: RasterSource) -> Tuple[str, str]:
    """
    Read text from bytes, a path, or a binary/text stream.

    Returns:
        Tuple of (text, label) where label names the source in error messages
    """
    if isinstance(source, (bytes, bytearray)):
        raw, label = bytes(source), "<bytes>"
    elif isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise FileNotFoundError(f"File not found: {path}")
        raw, label = path.read_bytes(), str(path)
    elif hasattr(source, "read"):
        raw = source.read()
        label = str(getattr(source, "name", "<stream>"))
    else:
        raise TypeError(f"Unsupported source type: {type(source).__name__}")

    if isinstance(raw, str):
        return raw, label
    try:
        return raw.decode("utf-8-sig"), label
    except UnicodeDecodeError as e:
        raise ParseError(f"{label}: not UTF-8 text: {e}", source=label) from e


def _parse_number(text: str, key: str, label: str, line: int, integer: bool = False) -> float:
    try:
        value = int(text) if integer else float(text)
    except ValueError:
        raise ParseError(f"{label}:{line}: invalid {key} value {text!r}", source=label, line=line)
    if not integer and not math.isfinite(value):
        raise ParseError(f"{label}:{line}: {key} must be finite", source=label, line=line)
    return value


def _rows_to_values(rows: List[List[str]], label: str, first_line: int) -> np.ndarray:
    try:
        return np.array(rows, dtype=float)
    except ValueError as e:
        raise ParseError(f"{label}: non-numeric cell value near line {first_line}: {e}", source=label)


def _build_geometry(
    header: Dict[str, float],
    n_rows: int,
    n_cols: int,
    label: str,
) -> RasterGeometry:
    cell = header["cellsize"]
    x0 = header["xllcorner"] if "xllcorner" in header else header["xllcenter"] - cell / 2.0
    y0 = header["yllcorner"] if "yllcorner" in header else header["yllcenter"] - cell / 2.0
    try:
        return RasterGeometry(
            origin_lat_deg=y0,
            origin_lon_deg=x0,
            cell_size_deg=cell,
            n_rows=n_rows,
            n_cols=n_cols,
        )
    except ValueError as e:
        raise ParseError(f"{label}: invalid raster geometry: {e}", source=label)


def _check_header_keys(header: Dict[str, float], label: str) -> None:
    missing = [k for k in ("cellsize",) if k not in header]
    if "xllcorner" not in header and "xllcenter" not in header:
        missing.append("xllcorner")
    if "yllcorner" not in header and "yllcenter" not in header:
        missing.append("yllcorner")
    if missing:
        raise ParseError(f"{label}: missing header field(s): {', '.join(missing)}", source=label)


def _read_esri_ascii(text: str, label: str) -> Tuple[RasterGeometry, np.ndarray, float]:
    lines = text.splitlines()
    header: Dict[str, float] = {}
    idx = 0

    while idx < len(lines):
        parts = lines[idx].split()
        if not parts:
            idx += 1
            continue
        key = parts[0].lower()
        if key not in _ESRI_KEYS:
            break
        if len(parts) != 2:
            raise ParseError(f"{label}:{idx + 1}: malformed header line {lines[idx]!r}", source=label, line=idx + 1)
        header[key] = _parse_number(parts[1], key, label, idx + 1, integer=key in ("ncols", "nrows"))
        idx += 1

    for key in ("ncols", "nrows"):
        if key not in header:
            raise ParseError(f"{label}: missing header field '{key}'", source=label)
    _check_header_keys(header, label)

    n_cols = int(header["ncols"])
    n_rows = int(header["nrows"])
    if n_cols < 1 or n_rows < 1:
        raise ParseError(f"{label}: ncols and nrows must be positive", source=label)

    rows: List[List[str]] = []
    first_data_line = idx + 1
    for line_no in range(idx, len(lines)):
        tokens = lines[line_no].split()
        if not tokens:
            continue
        if len(tokens) != n_cols:
            raise ParseError(
                f"{label}:{line_no + 1}: expected {n_cols} values (ncols), found {len(tokens)}",
                source=label,
                line=line_no + 1,
            )
        rows.append(tokens)

    if len(rows) != n_rows:
        raise ParseError(f"{label}: expected {n_rows} rows (nrows), found {len(rows)}", source=label)

    values = _rows_to_values(rows, label, first_data_line)
    geometry = _build_geometry(header, n_rows, n_cols, label)
    nodata = header.get("nodata_value", DEFAULT_NODATA)
    return geometry, values[::-1].copy(), float(nodata)


def _read_csv_matrix(text: str, label: str) -> Tuple[RasterGeometry, np.ndarray, float]:
    header: Dict[str, float] = {}
    rows: List[List[str]] = []
    first_data_line = 0

    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            for token in stripped[1:].replace(",", " ").split():
                if "=" not in token:
                    continue
                key, _, value = token.partition("=")
                key = key.strip().lower()
                if key in _ESRI_KEYS:
                    header[key] = _parse_number(value, key, label, line_no, integer=key in ("ncols", "nrows"))
            continue
        if not rows:
            first_data_line = line_no
        tokens = [t.strip() for t in stripped.split(",")]
        if rows and len(tokens) != len(rows[0]):
            raise ParseError(
                f"{label}:{line_no}: expected {len(rows[0])} values, found {len(tokens)}",
                source=label,
                line=line_no,
            )
        rows.append(tokens)

    _check_header_keys(header, label)
    if not rows:
        raise ParseError(f"{label}: no data rows", source=label)

    n_rows, n_cols = len(rows), len(rows[0])
    if "ncols" in header and int(header["ncols"]) != n_cols:
        raise ParseError(f"{label}: header ncols={int(header['ncols'])} but rows have {n_cols} values", source=label)
    if "nrows" in header and int(header["nrows"]) != n_rows:
        raise ParseError(f"{label}: header nrows={int(header['nrows'])} but found {n_rows} rows", source=label)

    values = _rows_to_values(rows, label, first_data_line)
    geometry = _build_geometry(header, n_rows, n_cols, label)
    nodata = header.get("nodata_value", DEFAULT_NODATA)
    return geometry, values[::-1].copy(), float(nodata)


def read_grid(
    source: RasterSource,
    fmt: Union[RasterFormat, str] = RasterFormat.ESRI_ASCII,
) -> Tuple[RasterGeometry, np.ndarray, float]:
    """
    Parse a grid file without interpreting its values.

    Returns:
        Tuple of (geometry, values with row 0 southernmost, nodata_value)

    Raises:
        ParseError: On malformed header, bad numbers or row/column count mismatch
    """
    fmt = RasterFormat(fmt)
    text, label = read_source_text(source)
    if fmt is RasterFormat.ESRI_ASCII:
        return _read_esri_ascii(text, label)
    return _read_csv_matrix(text, label)


def load_raster(
    source: RasterSource,
    fmt: Union[RasterFormat, str] = RasterFormat.ESRI_ASCII,
) -> ConductivityRaster:
    """
    Load a ground-conductivity raster.

    Args:
        source: Raw bytes, a file path, or a binary stream
        fmt: ``esri_ascii`` or ``csv_matrix``

    Returns:
        ConductivityRaster with NoData cells preserved

    Raises:
        ParseError: Malformed header or row/column count mismatch
        InvalidConductivityError: A non-nodata conductivity is <= 0 (a ValueError)
    """
    geometry, values, nodata = read_grid(source, fmt)
    raster = ConductivityRaster(geometry=geometry, cells=values, nodata_value=nodata)
    logger.debug(
        f"Loaded conductivity raster {geometry.n_rows}x{geometry.n_cols} "
        f"cell={geometry.cell_size_deg} deg, {int(raster.nodata_mask().sum())} nodata cells"
    )
    return raster


def load_landcover_raster(
    source: RasterSource,
    fmt: Union[RasterFormat, str] = RasterFormat.ESRI_ASCII,
) -> LandCoverRaster:
    """
    Load a land-cover class raster.

    Raises:
        ParseError: Malformed file or non-integer class codes
    """
    geometry, values, nodata = read_grid(source, fmt)
    try:
        return LandCoverRaster(geometry=geometry, cells=values, nodata_value=nodata)
    except ValueError as e:
        raise ParseError(f"Invalid land-cover raster: {e}")


# ============================================================================
# Writing
# ============================================================================

def write_grid(
    geometry: RasterGeometry,
    values: np.ndarray,
    nodata_value: float = DEFAULT_NODATA,
    fmt: Union[RasterFormat, str] = RasterFormat.ESRI_ASCII,
) -> bytes:
    """
    Encode a grid (row 0 southernmost) as ESRI ASCII or CSV matrix text.

    NaN values are written as ``nodata_value``. Floats use their shortest
    round-trip representation, so reading the output back is bit-exact.
    """
    fmt = RasterFormat(fmt)
    grid = np.array(values, dtype=float).reshape(geometry.shape)
    grid = np.where(np.isnan(grid), nodata_value, grid)

    out = io.StringIO()
    if fmt is RasterFormat.ESRI_ASCII:
        out.write(f"ncols {geometry.n_cols}\n")
        out.write(f"nrows {geometry.n_rows}\n")
        out.write(f"xllcorner {format_float(geometry.origin_lon_deg)}\n")
        out.write(f"yllcorner {format_float(geometry.origin_lat_deg)}\n")
        out.write(f"cellsize {format_float(geometry.cell_size_deg)}\n")
        out.write(f"NODATA_value {format_float(nodata_value)}\n")
        separator = " "
    else:
        out.write(
            f"# xllcorner={format_float(geometry.origin_lon_deg)} "
            f"yllcorner={format_float(geometry.origin_lat_deg)} "
            f"cellsize={format_float(geometry.cell_size_deg)} "
            f"nodata_value={format_float(nodata_value)}\n"
        )
        separator = ","

    for row in grid[::-1]:
        out.write(separator.join(format_float(v) for v in row))
        out.write("\n")
    return out.getvalue().encode("utf-8")


def write_raster(
    raster: ConductivityRaster,
    fmt: Union[RasterFormat, str] = RasterFormat.ESRI_ASCII,
) -> bytes:
    """Encode a conductivity raster; inverse of ``load_raster``."""
    return write_grid(raster.geometry, raster.cells, raster.nodata_value, fmt)
