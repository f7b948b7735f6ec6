"""
YAML persistence for fit results.

A saved fit holds C, e, the pooled RMS and one entry per curve. The same file
can later be used as a ``--params`` source (C and e) and as an ea table.
"""

from pathlib import Path
from typing import Any, Dict, Union

try:
    import yaml
except ImportError:
    yaml = None

from ..conductivity.ea_table import EaTable
from ..core.exceptions import ParseError
from ..core.logging import get_logger
from ..core.types import PropagationParams
from .solver import FitResult

logger = get_logger(__name__)


def _require_yaml() -> None:
    if yaml is None:
        raise ImportError(
            "pyyaml is required for fit result files. "
            "Install with: pip install pyyaml"
        )


def save_fit_result(result: FitResult, path: Union[str, Path]) -> Path:
    """Write a fit result as YAML and return the path."""
    _require_yaml()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(result.to_dict(), f, sort_keys=False)
    logger.info(f"Wrote fit result: {path}")
    return path


def save_fit_report(result: FitResult, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(result.report(), encoding="utf-8")
    return path


def save_ea_table(table: EaTable, path: Union[str, Path]) -> Path:
    """Write a fitted table in the plain ``sigma ea`` format ``load_ea_table`` reads."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table.to_text(), encoding="utf-8")
    logger.info(f"Wrote ea table ({len(table.rows)} rows): {path}")
    return path


def _read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    _require_yaml()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Parameters file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ParseError(f"{path}: invalid YAML: {e}", source=str(path))
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a mapping at top level", source=str(path))
    return data


def load_params(path: Union[str, Path]) -> PropagationParams:
    """
    Read C and e from a YAML file with ``c_dbuvm`` and ``e_exponent`` keys.

    Raises:
        ParseError: If the file is not a YAML mapping
        InvalidParamsError: If keys are missing, not numbers or out of range
    """
    return PropagationParams.from_dict(_read_yaml(path))


def load_fit_ea_table(path: Union[str, Path]) -> EaTable:
    """ea table from the ``curves`` list of a saved fit result."""
    data = _read_yaml(path)
    curves = data.get("curves")
    if not isinstance(curves, list) or not curves:
        raise ParseError(f"{path}: no 'curves' list", source=str(path))
    try:
        rows = sorted((float(c["sigma_s_per_m"]), float(c["ea_db_per_m"])) for c in curves)
        return EaTable(rows=tuple(rows))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path}: invalid curve entry ({e})", source=str(path))
