"""
Coverage sweeps and grid exporters.
"""

from .export import (
    CSV_HEADER,
    DEFAULT_VMAX_DBUVM,
    DEFAULT_VMIN_DBUVM,
    NODATA_RGB,
    PNG_COLORMAP,
    GridFormat,
    colorize,
    export_grid,
    write_grid_files,
)
from .grid import CoverageGrid, GridSpec, compute_coverage

__all__ = [
    "CSV_HEADER",
    "DEFAULT_VMAX_DBUVM",
    "DEFAULT_VMIN_DBUVM",
    "NODATA_RGB",
    "PNG_COLORMAP",
    "GridFormat",
    "colorize",
    "export_grid",
    "write_grid_files",
    "CoverageGrid",
    "GridSpec",
    "compute_coverage",
]
