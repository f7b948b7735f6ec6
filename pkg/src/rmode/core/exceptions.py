"""
Custom exceptions for the R-Mode signal strength toolkit.
"""

from typing import Optional


class RModeError(Exception):
    """Base exception for all rmode errors."""
    pass


class ConfigError(RModeError):
    """
    Error in run configuration.

    Raised when:
    - Configuration file is missing or is not a flat mapping
    - Unknown configuration keys are present
    - A referenced input file does not exist
    - Numeric values are outside module preconditions
    """

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


# ----------------------------------------------------------------------------
# geo
# ----------------------------------------------------------------------------

class AntipodalPathError(RModeError):
    """Endpoints are antipodal, so the great circle between them is undefined."""
    pass


class DegeneratePathError(RModeError):
    """Path endpoints coincide."""
    pass


# ----------------------------------------------------------------------------
# conductivity
# ----------------------------------------------------------------------------

class ParseError(RModeError):
    """
    Error parsing a raster, mapping, table or curve file.

    Raised when:
    - A header key is missing or malformed
    - The row or column count does not match the header
    - A value cannot be parsed as a number
    """

    def __init__(self, message: str, source: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.source = source
        self.line = line


class InvalidConductivityError(RModeError, ValueError):
    """A non-nodata conductivity is not a positive finite number."""
    pass


class UnmappedClassError(RModeError):
    """A land-cover class code has no conductivity in the mapping."""

    def __init__(self, code: int):
        super().__init__(f"Land-cover class {code} has no conductivity mapping")
        self.code = code


class OutsideRasterError(RModeError):
    """Point lies outside the raster extent."""

    def __init__(self, lat_deg: float, lon_deg: float):
        super().__init__(f"Point ({lat_deg:.6f}, {lon_deg:.6f}) is outside the raster")
        self.lat_deg = lat_deg
        self.lon_deg = lon_deg


class NoDataCellError(RModeError):
    """Point falls on a cell holding the NoData sentinel."""

    def __init__(self, row: int, col: int):
        super().__init__(f"Raster cell (row={row}, col={col}) is NoData")
        self.row = row
        self.col = col


class InterpolationError(RModeError):
    """Extra attenuation could not be determined for a conductivity."""
    pass


class NotInTableError(InterpolationError):
    """Conductivity is not a table row and the policy forbids interpolation."""

    def __init__(self, sigma: float):
        super().__init__(f"Conductivity {sigma!r} S/m is not in the ea table (policy exact_only)")
        self.sigma = sigma


class InvalidSigmaError(RModeError, ValueError):
    """Conductivity is not a positive finite number."""

    def __init__(self, sigma: float):
        super().__init__(f"Conductivity must be > 0 S/m, got {sigma!r}")
        self.sigma = sigma


# ----------------------------------------------------------------------------
# fitting
# ----------------------------------------------------------------------------

class InvalidParamsError(RModeError, ValueError):
    """Model constants are not finite or the exponent is out of range."""
    pass


class InvalidCurveError(RModeError, ValueError):
    """Reference curve violates its invariants (sample count, ordering, r > 0)."""
    pass


class DegenerateCurveError(RModeError):
    """Closed-form ea estimate is undefined for the curve."""
    pass


class NoCurvesError(RModeError):
    """Global fit was called without any reference curve."""
    pass


class NonFiniteInputError(RModeError, ValueError):
    """A reference sample is NaN or infinite."""

    def __init__(self, message: str, source_label: Optional[str] = None):
        super().__init__(message)
        self.source_label = source_label


class FitDivergedError(RModeError):
    """Global fit settled on constants outside the model's valid range."""

    def __init__(self, message: str, source_label: Optional[str] = None):
        super().__init__(message)
        self.source_label = source_label


class InvalidGridError(RModeError, ValueError):
    """Distance grid is not strictly increasing and positive."""
    pass


# ----------------------------------------------------------------------------
# propagation / coverage
# ----------------------------------------------------------------------------

class BelowMinRangeError(RModeError, ValueError):
    """Distance is below the model's minimum range."""

    def __init__(self, r_m: float, r_min_m: float):
        super().__init__(f"Range {r_m!r} m is below the minimum range {r_min_m} m")
        self.r_m = r_m
        self.r_min_m = r_min_m


class InvalidGridSpecError(RModeError, ValueError):
    """Coverage grid specification is inconsistent."""
    pass


class GridEncodingError(RModeError):
    """Coverage grid could not be encoded in the requested format."""

    def __init__(self, message: str, fmt: Optional[str] = None):
        super().__init__(message)
        self.fmt = fmt
