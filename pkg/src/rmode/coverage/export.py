"""
Coverage grid encoders: CSV, ESRI ASCII grid and one-pixel-per-cell PNG.

PNG color ramp: matplotlib ``viridis``, linear between ``vmin`` and ``vmax``
dB(uV/m) with values outside clipped to the ramp ends. Failed cells are
drawn in ``NODATA_RGB``. Row 0 of the image is the northernmost grid row.
"""

import io
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Tuple, Union

import numpy as np
from matplotlib import colormaps
from PIL import Image

from ..conductivity.raster import DEFAULT_NODATA, RasterFormat, write_grid
from ..core.exceptions import GridEncodingError
from ..core.logging import get_logger
from ..core.utils import format_float
from .grid import CoverageGrid

logger = get_logger(__name__)

PNG_COLORMAP = "viridis"
DEFAULT_VMIN_DBUVM = 40.0
DEFAULT_VMAX_DBUVM = 120.0
NODATA_RGB: Tuple[int, int, int] = (128, 128, 128)

CSV_HEADER = "lat,lon,field_dBuVm"


class GridFormat(str, Enum):
    CSV = "csv"
    ESRI_ASCII = "esri_ascii"
    PNG = "png"

    @property
    def extension(self) -> str:
        return {"csv": ".csv", "esri_ascii": ".asc", "png": ".png"}[self.value]


def _encode_csv(grid: CoverageGrid) -> bytes:
    lats = grid.spec.center_lats()
    lons = grid.spec.center_lons()
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for row in range(grid.n_rows - 1, -1, -1):
        lat = format_float(lats[row])
        for col in range(grid.n_cols):
            value = grid.values[row, col]
            out.write(f"{lat},{format_float(lons[col])},{'NaN' if np.isnan(value) else format_float(value)}\n")
    return out.getvalue().encode("utf-8")


def _encode_esri(grid: CoverageGrid) -> bytes:
    try:
        geometry = grid.spec.to_geometry()
    except ValueError as e:
        raise GridEncodingError(f"Grid cannot be written as ESRI ASCII: {e}", fmt=GridFormat.ESRI_ASCII.value)
    return write_grid(geometry, grid.values, DEFAULT_NODATA, RasterFormat.ESRI_ASCII)


def colorize(values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    """
    Map field strengths to 8-bit RGB with the PNG color ramp.

    Returns:
        uint8 array of shape values.shape + (3,)
    """
    values = np.asarray(values, dtype=float)
    nodata = np.isnan(values)
    scaled = np.clip((np.where(nodata, vmin, values) - vmin) / (vmax - vmin), 0.0, 1.0)
    rgba = colormaps[PNG_COLORMAP](scaled)
    rgb = np.round(rgba[..., :3] * 255.0).astype(np.uint8)
    rgb[nodata] = NODATA_RGB
    return rgb


def _encode_png(grid: CoverageGrid, vmin: float, vmax: float) -> bytes:
    rgb = np.ascontiguousarray(colorize(grid.values, vmin, vmax)[::-1])
    buffer = io.BytesIO()
    Image.fromarray(rgb).save(buffer, format="PNG")
    return buffer.getvalue()


def export_grid(
    grid: CoverageGrid,
    fmt: Union[GridFormat, str],
    vmin: float = DEFAULT_VMIN_DBUVM,
    vmax: float = DEFAULT_VMAX_DBUVM,
) -> bytes:
    """
    Encode a coverage grid.

    - csv: ``lat,lon,field_dBuVm`` header, one row per cell from north to
      south and west to east; failed cells are ``NaN``.
    - esri_ascii: standard header, failed cells written as NODATA -9999.
    - png: 8-bit RGB, one pixel per cell.

    Raises:
        GridEncodingError: On an unknown format, bad color scale or
            unencodable grid
    """
    try:
        fmt = GridFormat(fmt)
    except ValueError:
        raise GridEncodingError(f"Unknown grid format: {fmt!r}", fmt=str(fmt))

    if fmt is GridFormat.CSV:
        return _encode_csv(grid)
    if fmt is GridFormat.ESRI_ASCII:
        return _encode_esri(grid)

    if not (np.isfinite(vmin) and np.isfinite(vmax) and vmin < vmax):
        raise GridEncodingError(f"PNG scale needs finite vmin < vmax, got [{vmin}, {vmax}]", fmt=fmt.value)
    try:
        return _encode_png(grid, vmin, vmax)
    except (OSError, ValueError) as e:
        raise GridEncodingError(f"PNG encoding failed: {e}", fmt=fmt.value)


def write_grid_files(
    grid: CoverageGrid,
    out_dir: Union[str, Path],
    stem: str,
    formats: Iterable[Union[GridFormat, str]],
    vmin: float = DEFAULT_VMIN_DBUVM,
    vmax: float = DEFAULT_VMAX_DBUVM,
) -> Dict[str, Path]:
    """
    Export a grid in each format to ``out_dir/stem<ext>``.

    Returns:
        Dictionary mapping format name to written path
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise GridEncodingError(f"Cannot create output directory {out_dir}: {e}")

    written = {}
    for fmt in formats:
        try:
            fmt = GridFormat(fmt)
        except ValueError:
            raise GridEncodingError(f"Unknown grid format: {fmt!r}", fmt=str(fmt))
        data = export_grid(grid, fmt, vmin=vmin, vmax=vmax)
        path = out_dir / f"{stem}{fmt.extension}"
        try:
            path.write_bytes(data)
        except OSError as e:
            raise GridEncodingError(f"Cannot write {path}: {e}", fmt=fmt.value)
        logger.info(f"Wrote {fmt.value}: {path}")
        written[fmt.value] = path
    return written
