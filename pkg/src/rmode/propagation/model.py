"""
Closed-form ground-wave field strength over homogeneous ground.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np

from ..core.exceptions import BelowMinRangeError
from ..core.types import PropagationParams
from ..geo import GeoPoint

# Smallest range the model is evaluated at; guards the log singularity.
R_MIN_M = 1.0

# Below this range results are computed but flagged as near-field.
NEAR_FIELD_LIMIT_M = 1000.0


@dataclass(frozen=True)
class Transmitter:
    """
    A transmitting station.

    Attributes:
        id: Station identifier
        location: Antenna position
        power_offset_db: Added to C; 0 reproduces the nominal radiated power
    """
    id: str
    location: GeoPoint
    power_offset_db: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.power_offset_db):
            raise ValueError(f"power_offset_db must be finite, got {self.power_offset_db!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "lat_deg": self.location.lat_deg,
            "lon_deg": self.location.lon_deg,
            "power_offset_db": self.power_offset_db,
        }


def homogeneous_model(
    r_m: Union[float, np.ndarray],
    params: PropagationParams,
    ea_db_per_m: float,
) -> Union[float, np.ndarray]:
    """``C - 10*e*log10(r) - ea*r`` without range checks; vectorized over r."""
    return params.c_dbuvm - 10.0 * params.e_exponent * np.log10(r_m) - ea_db_per_m * r_m


def field_strength_homogeneous(
    r_m: float,
    params: PropagationParams,
    ea_db_per_m: float,
    power_offset_db: float = 0.0,
) -> float:
    """
    Field strength in dB(uV/m) at range ``r_m`` over ground of constant conductivity.

    Raises:
        BelowMinRangeError: If r_m < 1 m
    """
    if not r_m >= R_MIN_M:
        raise BelowMinRangeError(r_m, R_MIN_M)
    return float(homogeneous_model(r_m, params, ea_db_per_m)) + power_offset_db
