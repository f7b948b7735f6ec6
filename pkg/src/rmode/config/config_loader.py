"""
Run configuration for the rmode CLI.

A run config is a flat YAML mapping. Precedence, lowest first: built-in
defaults, config file, environment (``RMODE_OUTPUT_DIR``), command-line flags.
Relative paths in a config file are resolved against the file's directory.
"""

import math
import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

try:
    import yaml
except ImportError:
    yaml = None

from ..conductivity.raster import RasterFormat
from ..core.exceptions import ConfigError, InvalidGridSpecError
from ..core.logging import get_logger
from ..core.types import PARAM_PRESETS, EaPolicy
from ..coverage.export import DEFAULT_VMAX_DBUVM, DEFAULT_VMIN_DBUVM, GridFormat
from ..coverage.grid import GridSpec
from ..geo import GeoPoint
from ..propagation.model import Transmitter
from ..propagation.path import DEFAULT_FALLBACK_SIGMA

logger = get_logger(__name__)

OUTPUT_DIR_ENV = "RMODE_OUTPUT_DIR"

_PATH_KEYS = ("conductivity_raster", "landcover_mapping", "ea_table", "params")
_FLOAT_KEYS = (
    "tx_lat", "tx_lon", "power_offset_db", "uniform_sigma", "c_dbuvm", "e_exponent",
    "grid_lat_min", "grid_lon_min", "grid_cell_size_deg", "max_step_m", "fallback_sigma",
    "png_vmin", "png_vmax",
)
_INT_KEYS = ("grid_n_rows", "grid_n_cols", "n_jobs")
_GRID_KEYS = ("grid_lat_min", "grid_lon_min", "grid_cell_size_deg", "grid_n_rows", "grid_n_cols")

_DISTANCE_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(m|km)?\s*$")


def parse_distance(text: Union[str, float, int]) -> float:
    """
    Distance in meters from ``"250"``, ``"250m"`` or ``"0.5km"``.

    Raises:
        ValueError: On anything else
    """
    if isinstance(text, (int, float)):
        return float(text)
    match = _DISTANCE_RE.match(str(text))
    if not match:
        raise ValueError(f"Invalid distance {text!r}; use meters or a 'km' suffix")
    value = float(match.group(1))
    return value * 1000.0 if match.group(2) == "km" else value


@dataclass
class RunConfig:
    """
    Settings for point, coverage and fit runs.

    Ground is either ``conductivity_raster`` (conductivity values, or land-cover
    class codes when ``landcover_mapping`` is set) or ``uniform_sigma``.
    C and e come from ``params`` (a saved fit), else ``c_dbuvm``/``e_exponent``,
    else ``params_preset``.
    """
    transmitter_id: str = "TX"
    tx_lat: Optional[float] = None
    tx_lon: Optional[float] = None
    power_offset_db: float = 0.0

    conductivity_raster: Optional[str] = None
    raster_format: str = RasterFormat.ESRI_ASCII.value
    landcover_mapping: Optional[str] = None
    uniform_sigma: Optional[float] = None

    ea_table: Optional[str] = None
    params: Optional[str] = None
    params_preset: str = "mf_rmode"
    c_dbuvm: Optional[float] = None
    e_exponent: Optional[float] = None

    grid_lat_min: Optional[float] = None
    grid_lon_min: Optional[float] = None
    grid_cell_size_deg: Optional[float] = None
    grid_n_rows: Optional[int] = None
    grid_n_cols: Optional[int] = None

    max_step_m: Optional[float] = None
    ea_policy: str = EaPolicy.LOGLIN_INTERP.value
    fallback_sigma: Optional[float] = DEFAULT_FALLBACK_SIGMA

    output_dir: str = "output"
    output_stem: str = "coverage"
    output_formats: List[str] = field(default_factory=lambda: [GridFormat.CSV.value])
    png_vmin: float = DEFAULT_VMIN_DBUVM
    png_vmax: float = DEFAULT_VMAX_DBUVM
    n_jobs: int = 1

    # ------------------------------------------------------------------
    # Loading
    # ------------------------------------------------------------------

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: Optional[Path] = None) -> "RunConfig":
        """
        Build a config from a flat mapping.

        Raises:
            ConfigError: On unknown keys or values of the wrong type
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config key(s): {', '.join(unknown)}")

        values: Dict[str, Any] = {}
        for key, value in data.items():
            if value is None:
                values[key] = None
                continue
            try:
                if key in _FLOAT_KEYS:
                    value = parse_distance(value) if key == "max_step_m" else float(value)
                elif key in _INT_KEYS:
                    if isinstance(value, bool) or float(value) != int(value):
                        raise ValueError(f"{value!r} is not an integer")
                    value = int(value)
                elif key == "output_formats":
                    value = [value] if isinstance(value, str) else [str(v) for v in value]
                else:
                    value = str(value)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Config key '{key}': {e}")
            if key in _PATH_KEYS and base_dir is not None and not Path(value).is_absolute():
                value = str((base_dir / value).resolve())
            values[key] = value
        return cls(**values)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """
        Load a YAML config file.

        Raises:
            ConfigError: If the file is missing, not YAML, or has bad keys
        """
        if yaml is None:
            raise ImportError(
                "pyyaml is required for config loading. "
                "Install with: pip install pyyaml"
            )
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}", path=str(path))

        logger.info(f"Loading config from: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {path}: {e}", path=str(path))
        if not isinstance(data, dict):
            raise ConfigError(f"Config {path} must be a mapping of key: value pairs", path=str(path))
        return cls.from_dict(data, base_dir=path.parent)

    def apply_env(self, environ: Optional[Mapping[str, str]] = None) -> "RunConfig":
        """Copy with the output directory taken from ``RMODE_OUTPUT_DIR`` when set."""
        environ = os.environ if environ is None else environ
        output_dir = environ.get(OUTPUT_DIR_ENV)
        if output_dir:
            logger.debug(f"{OUTPUT_DIR_ENV} overrides output_dir: {output_dir}")
            return replace(self, output_dir=output_dir)
        return self

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return asdict(self)

    def dump(self) -> str:
        """Effective config as YAML; ``from_dict(yaml.safe_load(dump()))`` reproduces it."""
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    # ------------------------------------------------------------------
    # Validation and derived objects
    # ------------------------------------------------------------------

    def validate(self, require_transmitter: bool = True, require_grid: bool = False) -> None:
        """
        Check ranges, enumerations and that referenced files exist.

        Raises:
            ConfigError: On the first problem found
        """
        try:
            EaPolicy(self.ea_policy)
        except ValueError:
            raise ConfigError(f"ea_policy must be one of {[p.value for p in EaPolicy]}, got {self.ea_policy!r}")
        try:
            RasterFormat(self.raster_format)
        except ValueError:
            raise ConfigError(f"raster_format must be one of {[f.value for f in RasterFormat]}, got {self.raster_format!r}")
        for fmt in self.output_formats:
            try:
                GridFormat(fmt)
            except ValueError:
                raise ConfigError(f"Unknown output format {fmt!r}; use csv, esri_ascii or png")
        if self.params is None and (self.c_dbuvm is None) != (self.e_exponent is None):
            raise ConfigError("c_dbuvm and e_exponent must be given together")
        if self.params is None and self.c_dbuvm is None and self.params_preset not in PARAM_PRESETS:
            raise ConfigError(f"params_preset must be one of {sorted(PARAM_PRESETS)}, got {self.params_preset!r}")

        for key in _PATH_KEYS:
            value = getattr(self, key)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{key} file not found: {value}", path=value)

        if self.conductivity_raster is not None and self.uniform_sigma is not None:
            raise ConfigError("Set either conductivity_raster or uniform_sigma, not both")
        if self.landcover_mapping is not None and self.conductivity_raster is None:
            raise ConfigError("landcover_mapping needs conductivity_raster (the class-code raster)")
        if self.uniform_sigma is not None and not (math.isfinite(self.uniform_sigma) and self.uniform_sigma > 0):
            raise ConfigError(f"uniform_sigma must be > 0, got {self.uniform_sigma!r}")
        if self.fallback_sigma is not None and not (math.isfinite(self.fallback_sigma) and self.fallback_sigma > 0):
            raise ConfigError(f"fallback_sigma must be > 0, got {self.fallback_sigma!r}")
        if self.max_step_m is not None and not (math.isfinite(self.max_step_m) and self.max_step_m > 0):
            raise ConfigError(f"max_step_m must be > 0, got {self.max_step_m!r}")
        if not math.isfinite(self.power_offset_db):
            raise ConfigError("power_offset_db must be finite")
        if not (math.isfinite(self.png_vmin) and math.isfinite(self.png_vmax) and self.png_vmin < self.png_vmax):
            raise ConfigError(f"png_vmin must be < png_vmax, got {self.png_vmin}, {self.png_vmax}")
        if self.n_jobs == 0:
            raise ConfigError("n_jobs must be a positive worker count or negative (joblib convention)")

        if require_transmitter:
            self.transmitter()
            if self.conductivity_raster is None and self.uniform_sigma is None:
                raise ConfigError("No ground given: set conductivity_raster or uniform_sigma")
        if require_grid:
            self.grid_spec()

    def transmitter(self) -> Transmitter:
        """Transmitter from the tx_* keys."""
        if self.tx_lat is None or self.tx_lon is None:
            raise ConfigError("tx_lat and tx_lon are required")
        try:
            location = GeoPoint(self.tx_lat, self.tx_lon)
        except ValueError as e:
            raise ConfigError(f"Invalid transmitter position: {e}")
        return Transmitter(id=self.transmitter_id, location=location, power_offset_db=self.power_offset_db)

    def grid_spec(self) -> GridSpec:
        """Output grid from the grid_* keys."""
        missing = [key for key in _GRID_KEYS if getattr(self, key) is None]
        if missing:
            raise ConfigError(f"Missing grid key(s): {', '.join(missing)}")
        try:
            return GridSpec(
                lat_min=self.grid_lat_min,
                lon_min=self.grid_lon_min,
                cell_size_deg=self.grid_cell_size_deg,
                n_rows=self.grid_n_rows,
                n_cols=self.grid_n_cols,
            )
        except InvalidGridSpecError as e:
            raise ConfigError(f"Invalid grid: {e}")
