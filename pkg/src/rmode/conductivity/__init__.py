"""
Conductivity subpackage: ground-conductivity rasters, land-cover mapping
and the conductivity to extra-attenuation table.
"""

from .raster import (
    DEFAULT_NODATA,
    CellHit,
    CellStatus,
    ConductivityRaster,
    LandCoverRaster,
    RasterFormat,
    RasterGeometry,
    RasterLookup,
    cell_at,
    load_landcover_raster,
    load_raster,
    read_grid,
    write_grid,
    write_raster,
)
from .landcover import (
    LandCoverMapping,
    apply_landcover_mapping,
    load_landcover_mapping,
)
from .ea_table import (
    MF_RMODE_EA_ROWS,
    EaLookup,
    EaSource,
    EaTable,
    ea_for_sigma,
    ea_for_sigmas,
    load_ea_table,
    lookup_ea,
)

__all__ = [
    "DEFAULT_NODATA",
    "CellHit",
    "CellStatus",
    "ConductivityRaster",
    "LandCoverRaster",
    "RasterFormat",
    "RasterGeometry",
    "RasterLookup",
    "cell_at",
    "load_landcover_raster",
    "load_raster",
    "read_grid",
    "write_grid",
    "write_raster",
    "LandCoverMapping",
    "apply_landcover_mapping",
    "load_landcover_mapping",
    "MF_RMODE_EA_ROWS",
    "EaLookup",
    "EaSource",
    "EaTable",
    "ea_for_sigma",
    "ea_for_sigmas",
    "load_ea_table",
    "lookup_ea",
]
