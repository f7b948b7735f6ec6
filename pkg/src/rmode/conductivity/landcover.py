"""
Land-cover class to ground-conductivity mapping.

Mapping files are plain text, one ``class_code conductivity_S_per_m`` pair
per line; ``#`` starts a comment.
"""

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..core.exceptions import ParseError, UnmappedClassError
from ..core.logging import get_logger
from .raster import (
    DEFAULT_NODATA,
    ConductivityRaster,
    LandCoverRaster,
    RasterSource,
    read_source_text,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class LandCoverMapping:
    """
    Ordered (class_code, conductivity) pairs.

    Attributes:
        entries: Pairs of integer class code and conductivity in S/m
    """
    entries: Tuple[Tuple[int, float], ...]

    def __post_init__(self) -> None:
        entries = tuple((int(code), float(sigma)) for code, sigma in self.entries)
        codes = [code for code, _ in entries]
        if len(set(codes)) != len(codes):
            raise ValueError(f"Land-cover class codes must be unique: {codes}")
        for code, sigma in entries:
            if not (math.isfinite(sigma) and sigma > 0):
                raise ValueError(f"Conductivity for class {code} must be > 0 S/m, got {sigma!r}")
        object.__setattr__(self, "entries", entries)

    def as_dict(self) -> Dict[int, float]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def load_landcover_mapping(source: RasterSource) -> LandCoverMapping:
    """
    Parse a land-cover mapping file.

    Raises:
        ParseError: On malformed lines, duplicate codes or nonpositive conductivities
    """
    text, label = read_source_text(source)
    entries = []
    seen = set()

    for line_no, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        parts = content.split()
        if len(parts) != 2:
            raise ParseError(
                f"{label}:{line_no}: expected 'class_code conductivity', got {line.strip()!r}",
                source=label,
                line=line_no,
            )
        try:
            code = int(parts[0])
            sigma = float(parts[1])
        except ValueError:
            raise ParseError(f"{label}:{line_no}: invalid number in {line.strip()!r}", source=label, line=line_no)
        if code in seen:
            raise ParseError(f"{label}:{line_no}: duplicate class code {code}", source=label, line=line_no)
        if not (math.isfinite(sigma) and sigma > 0):
            raise ParseError(
                f"{label}:{line_no}: conductivity for class {code} must be > 0 S/m",
                source=label,
                line=line_no,
            )
        seen.add(code)
        entries.append((code, sigma))

    if not entries:
        raise ParseError(f"{label}: mapping has no entries", source=label)
    return LandCoverMapping(entries=tuple(entries))


def apply_landcover_mapping(
    classes_raster: LandCoverRaster,
    mapping: LandCoverMapping,
) -> ConductivityRaster:
    """
    Replace every class code with its conductivity.

    NoData class cells become NoData conductivity cells.

    Raises:
        UnmappedClassError: If a class code present in the raster has no entry
            (the smallest missing code is reported)
    """
    lookup = mapping.as_dict()
    valid = ~classes_raster.nodata_mask()
    codes = np.unique(classes_raster.cells[valid]).astype(np.int64)

    missing = [int(code) for code in codes if int(code) not in lookup]
    if missing:
        raise UnmappedClassError(missing[0])

    sigma = np.full(classes_raster.geometry.shape, DEFAULT_NODATA)
    for code in codes:
        sigma[valid & (classes_raster.cells == code)] = lookup[int(code)]

    logger.debug(f"Mapped {len(codes)} land-cover classes to conductivity")
    return ConductivityRaster(geometry=classes_raster.geometry, cells=sigma, nodata_value=DEFAULT_NODATA)
