"""
Extra attenuation per meter as a function of ground conductivity.

The shipped table holds the MF R-Mode values fitted with C=195.876 and
e=2.046. The published unit header is dB(uV)/m, but ea multiplies a distance
in meters and the product is subtracted from a dB value, so values are
treated as dB per meter.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from ..core.exceptions import InvalidSigmaError, NotInTableError, ParseError
from ..core.logging import get_logger
from ..core.types import EaPolicy
from ..core.utils import compute_pairs_hash, format_float
from .raster import RasterSource, read_source_text

logger = get_logger(__name__)

# (sigma S/m, ea dB/m)
MF_RMODE_EA_ROWS: Tuple[Tuple[float, float], ...] = (
    (5e-4, 2.24e-4),
    (1e-3, 1.64e-4),
    (2e-3, 1.04e-4),
    (5e-3, 4.60e-5),
    (8e-3, 2.89e-5),
    (1e-2, 2.37e-5),
    (4.0, -5.40e-7),
)

# Relative tolerance for treating a conductivity as a table row.
_EXACT_RTOL = 1e-12


class EaSource(str, Enum):
    """How an ea value was obtained."""
    TABLE = "table"
    INTERPOLATED = "interpolated"
    CLAMPED = "clamped"
    NEAREST = "nearest"


class EaLookup(NamedTuple):
    ea_db_per_m: float
    source: EaSource


@dataclass(frozen=True)
class EaTable:
    """
    Conductivity to extra-attenuation pairs, sorted by conductivity.

    Attributes:
        rows: (sigma_S_per_m, ea_dB_per_m) pairs with strictly increasing sigma > 0
    """
    rows: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        rows = tuple((float(s), float(ea)) for s, ea in self.rows)
        if not rows:
            raise ValueError("ea table must have at least one row")
        previous = 0.0
        for sigma, ea in rows:
            if not (math.isfinite(sigma) and sigma > previous):
                raise ValueError(f"ea table conductivities must be > 0 and strictly increasing, got {sigma!r}")
            if not math.isfinite(ea):
                raise ValueError(f"ea for sigma={sigma!r} must be finite")
            previous = sigma
        object.__setattr__(self, "rows", rows)

    @classmethod
    def default(cls) -> "EaTable":
        """MF R-Mode table for C=195.876, e=2.046."""
        return cls(rows=MF_RMODE_EA_ROWS)

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([s for s, _ in self.rows])

    @property
    def eas(self) -> np.ndarray:
        return np.array([ea for _, ea in self.rows])

    def __len__(self) -> int:
        return len(self.rows)

    def content_hash(self) -> str:
        """SHA256 over the table rows."""
        return compute_pairs_hash(self.rows)

    def to_text(self) -> str:
        """Render in the ea table file format."""
        lines = ["# sigma_S_per_m ea_dB_per_m"]
        lines.extend(f"{format_float(s)} {format_float(ea)}" for s, ea in self.rows)
        return "\n".join(lines) + "\n"


def load_ea_table(source: RasterSource) -> EaTable:
    """
    Parse an ea table file of ``sigma_S_per_m ea_dB_per_m`` lines.

    Raises:
        ParseError: On malformed lines or an invalid table
    """
    text, label = read_source_text(source)
    rows = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        parts = content.split()
        if len(parts) != 2:
            raise ParseError(f"{label}:{line_no}: expected 'sigma ea', got {line.strip()!r}", source=label, line=line_no)
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ParseError(f"{label}:{line_no}: invalid number in {line.strip()!r}", source=label, line=line_no)

    try:
        return EaTable(rows=tuple(rows))
    except ValueError as e:
        raise ParseError(f"{label}: {e}", source=label)


def lookup_ea(
    sigma: float,
    table: EaTable,
    policy: Union[EaPolicy, str] = EaPolicy.LOGLIN_INTERP,
) -> EaLookup:
    """
    Extra attenuation for a conductivity, with how it was obtained.

    - A table row returns the stored value under every policy.
    - ``loglin_interp`` interpolates linearly in log10(sigma) and clamps
      outside the table span.
    - ``nearest`` returns the row closest in log10(sigma); ties go to the
      smaller conductivity.
    - ``exact_only`` raises on a miss.

    Raises:
        InvalidSigmaError: If sigma <= 0 or not finite
        NotInTableError: On a miss under ``exact_only``
    """
    policy = EaPolicy(policy)
    try:
        sigma = float(sigma)
    except (TypeError, ValueError):
        raise InvalidSigmaError(sigma)
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidSigmaError(sigma)

    sigmas = table.sigmas
    eas = table.eas
    hits = np.flatnonzero(np.isclose(sigmas, sigma, rtol=_EXACT_RTOL, atol=0.0))
    if hits.size:
        return EaLookup(float(eas[hits[0]]), EaSource.TABLE)

    if policy is EaPolicy.EXACT_ONLY:
        raise NotInTableError(float(sigma))

    x = math.log10(sigma)
    xs = np.log10(sigmas)

    if policy is EaPolicy.NEAREST:
        idx = int(np.argmin(np.abs(xs - x)))
        return EaLookup(float(eas[idx]), EaSource.NEAREST)

    if x < xs[0]:
        return EaLookup(float(eas[0]), EaSource.CLAMPED)
    if x > xs[-1]:
        return EaLookup(float(eas[-1]), EaSource.CLAMPED)
    return EaLookup(float(np.interp(x, xs, eas)), EaSource.INTERPOLATED)


def ea_for_sigma(
    sigma: float,
    table: EaTable,
    policy: Union[EaPolicy, str] = EaPolicy.LOGLIN_INTERP,
) -> float:
    """Extra attenuation in dB/m for a conductivity under a lookup policy."""
    return lookup_ea(sigma, table, policy).ea_db_per_m


def ea_for_sigmas(
    sigmas: np.ndarray,
    table: EaTable,
    policy: Union[EaPolicy, str] = EaPolicy.LOGLIN_INTERP,
    fill_missing: Optional[float] = None,
) -> np.ndarray:
    """
    Vectorized ``ea_for_sigma``; each distinct conductivity is looked up once.

    Args:
        fill_missing: Value stored for conductivities that are not table rows
            under ``exact_only``; None raises ``NotInTableError`` instead
    """
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.size == 0:
        return np.empty(sigmas.shape)
    unique, inverse = np.unique(sigmas, return_inverse=True)
    values = np.empty(unique.shape)
    for i, sigma in enumerate(unique):
        try:
            values[i] = ea_for_sigma(float(sigma), table, policy)
        except NotInTableError:
            if fill_missing is None:
                raise
            values[i] = fill_missing
    return values[inverse].reshape(sigmas.shape)
