"""
Core data types shared by the fitting and propagation packages.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

from .exceptions import InvalidParamsError


class EaPolicy(str, Enum):
    """How extra attenuation is obtained for an off-table conductivity."""
    EXACT_ONLY = "exact_only"
    LOGLIN_INTERP = "loglin_interp"
    NEAREST = "nearest"


@dataclass(frozen=True)
class PropagationParams:
    """
    Constants of the approximate ground-wave model
    ``field = C - 10*log10(r**e) - sum(ea_i * r_i)``.

    Attributes:
        c_dbuvm: Intercept constant, dB(uV/m) at 1 m
        e_exponent: Distance exponent, within (0, 4)
    """
    c_dbuvm: float
    e_exponent: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.c_dbuvm):
            raise InvalidParamsError(f"C must be finite, got {self.c_dbuvm!r}")
        if not math.isfinite(self.e_exponent) or not 0.0 < self.e_exponent < 4.0:
            raise InvalidParamsError(f"Exponent e must be in (0, 4), got {self.e_exponent!r}")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {"c_dbuvm": self.c_dbuvm, "e_exponent": self.e_exponent}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PropagationParams":
        """Create from dictionary."""
        try:
            return cls(c_dbuvm=float(data["c_dbuvm"]), e_exponent=float(data["e_exponent"]))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, InvalidParamsError):
                raise
            raise InvalidParamsError(f"Invalid propagation params {data!r}: {e}") from e


# MF R-Mode constants fitted over all ground conductivity cases.
MF_RMODE_PARAMS = PropagationParams(c_dbuvm=195.876, e_exponent=2.046)

# eLoran approximation: 189.353 - 10*log10(r**2).
ELORAN_PARAMS = PropagationParams(c_dbuvm=189.353, e_exponent=2.0)

PARAM_PRESETS: Dict[str, PropagationParams] = {
    "mf_rmode": MF_RMODE_PARAMS,
    "eloran": ELORAN_PARAMS,
}
