"""
Reference field-strength curves: the fitting input.

Curve file format::

    # sigma=0.005 units=km label=grwave-300kHz
    10 112.4
    20 105.9
    ...

The header must give ``sigma``; ``units`` defaults to m. Rows are
``distance field_dBuVm``, whitespace or comma separated. Distances are
converted to meters on load.
"""

import io
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..conductivity.raster import RasterSource, read_source_text
from ..core.exceptions import InvalidCurveError, InvalidGridError, ParseError
from ..core.logging import get_logger
from ..core.types import PropagationParams
from ..core.utils import format_float
from ..propagation.model import homogeneous_model

logger = get_logger(__name__)

MIN_SAMPLES = 3

_UNIT_SCALE = {"m": 1.0, "km": 1000.0}


@dataclass(frozen=True, eq=False)
class ReferenceCurve:
    """
    Field strength versus distance over ground of one conductivity.

    Attributes:
        sigma_s_per_m: Ground conductivity, S/m
        r_m: Distances in meters, strictly increasing and > 0
        field_dbuvm: Field strength samples, dB(uV/m)
        source_label: Free text naming where the samples came from
        weights: Optional per-sample weights (default uniform)
    """
    sigma_s_per_m: float
    r_m: np.ndarray
    field_dbuvm: np.ndarray
    source_label: str = ""
    weights: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma_s_per_m) and self.sigma_s_per_m > 0):
            raise InvalidCurveError(f"Curve conductivity must be > 0 S/m, got {self.sigma_s_per_m!r}")

        r = np.array(self.r_m, dtype=float).ravel()
        field = np.array(self.field_dbuvm, dtype=float).ravel()
        if r.size != field.size:
            raise InvalidCurveError(f"Curve has {r.size} distances but {field.size} field values")
        if r.size < MIN_SAMPLES:
            raise InvalidCurveError(f"Curve needs at least {MIN_SAMPLES} samples, got {r.size}")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise InvalidCurveError("Curve distances must be finite and > 0")
        if np.any(np.diff(r) <= 0):
            raise InvalidCurveError("Curve distances must be strictly increasing")

        weights = None
        if self.weights is not None:
            weights = np.array(self.weights, dtype=float).ravel()
            if weights.size != r.size:
                raise InvalidCurveError(f"Curve has {r.size} samples but {weights.size} weights")
            if not np.all(np.isfinite(weights)) or np.any(weights < 0) or weights.sum() <= 0:
                raise InvalidCurveError("Weights must be finite, >= 0 and not all zero")
            weights.setflags(write=False)

        r.setflags(write=False)
        field.setflags(write=False)
        object.__setattr__(self, "r_m", r)
        object.__setattr__(self, "field_dbuvm", field)
        object.__setattr__(self, "weights", weights)

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.r_m.tolist(), self.field_dbuvm.tolist()))

    @property
    def sample_weights(self) -> np.ndarray:
        return self.weights if self.weights is not None else np.ones(self.r_m.size)

    def __len__(self) -> int:
        return int(self.r_m.size)


def synthesize_curve(
    sigma: float,
    params: PropagationParams,
    ea_db_per_m: float,
    r_grid,
    source_label: str = "synthetic",
) -> ReferenceCurve:
    """
    Evaluate ``C - 10*e*log10(r) - ea*r`` on a distance grid.

    Raises:
        InvalidGridError: If r_grid is not strictly increasing, positive and
            at least three samples long
    """
    r = np.array(r_grid, dtype=float).ravel()
    if r.size < MIN_SAMPLES:
        raise InvalidGridError(f"Distance grid needs at least {MIN_SAMPLES} values, got {r.size}")
    if not np.all(np.isfinite(r)) or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise InvalidGridError("Distance grid must be finite, positive and strictly increasing")

    field = homogeneous_model(r, params, ea_db_per_m)
    return ReferenceCurve(sigma_s_per_m=sigma, r_m=r, field_dbuvm=field, source_label=source_label)


def _parse_header(line: str) -> dict:
    header = {}
    for token in line.lstrip("#").replace(",", " ").split():
        if "=" in token:
            key, _, value = token.partition("=")
            header[key.strip().lower()] = value.strip()
    return header


def load_curve(source: RasterSource, source_label: Optional[str] = None) -> ReferenceCurve:
    """
    Parse a reference curve file.

    Args:
        source: Raw bytes, a file path, or a binary stream
        source_label: Label stored on the curve (default: header ``label`` or file name)

    Raises:
        ParseError: On a missing or malformed header, bad rows, or invalid curve data
    """
    text, label = read_source_text(source)
    header: dict = {}
    rows: List[Tuple[float, float]] = []

    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            header.update(_parse_header(stripped))
            continue
        parts = stripped.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(f"{label}:{line_no}: expected 'r field_dBuVm', got {stripped!r}", source=label, line=line_no)
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ParseError(f"{label}:{line_no}: invalid number in {stripped!r}", source=label, line=line_no)

    if "sigma" not in header:
        raise ParseError(f"{label}: missing '# sigma=<S/m>' header", source=label)
    try:
        sigma = float(header["sigma"])
    except ValueError:
        raise ParseError(f"{label}: invalid sigma {header['sigma']!r}", source=label)

    units = header.get("units", "m").lower()
    if units not in _UNIT_SCALE:
        raise ParseError(f"{label}: units must be 'm' or 'km', got {units!r}", source=label)

    scale = _UNIT_SCALE[units]
    try:
        curve = ReferenceCurve(
            sigma_s_per_m=sigma,
            r_m=np.array([r for r, _ in rows]) * scale,
            field_dbuvm=np.array([f for _, f in rows]),
            source_label=source_label or header.get("label") or label,
        )
    except InvalidCurveError as e:
        raise ParseError(f"{label}: {e}", source=label)

    logger.debug(f"Loaded curve {curve.source_label}: sigma={sigma} S/m, {len(curve)} samples")
    return curve


def write_curve(curve: ReferenceCurve, units: str = "m") -> bytes:
    """Encode a curve in the curve file format."""
    if units not in _UNIT_SCALE:
        raise ValueError(f"units must be 'm' or 'km', got {units!r}")
    scale = _UNIT_SCALE[units]

    out = io.StringIO()
    out.write(f"# sigma={format_float(curve.sigma_s_per_m)} units={units}")
    if curve.source_label and " " not in curve.source_label:
        out.write(f" label={curve.source_label}")
    out.write("\n")
    for r, field in zip(curve.r_m, curve.field_dbuvm):
        out.write(f"{format_float(r / scale)} {format_float(field)}\n")
    return out.getvalue().encode("utf-8")
