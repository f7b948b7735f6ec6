"""
Annotated coverage map figure.
"""

from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..core.logging import get_logger  # noqa: E402
from .export import DEFAULT_VMAX_DBUVM, DEFAULT_VMIN_DBUVM, NODATA_RGB, PNG_COLORMAP  # noqa: E402
from .grid import CoverageGrid  # noqa: E402

logger = get_logger(__name__)


def render_coverage_map(
    grid: CoverageGrid,
    out_path: Union[str, Path],
    vmin: float = DEFAULT_VMIN_DBUVM,
    vmax: float = DEFAULT_VMAX_DBUVM,
    title: Optional[str] = None,
) -> Path:
    """
    Save a lat/lon map of a coverage grid with a colorbar and the
    transmitter marked when its position is in the grid metadata.
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    lat_min, lat_max, lon_min, lon_max = grid.bounds
    cmap = matplotlib.colormaps[PNG_COLORMAP].with_extremes(bad=tuple(c / 255.0 for c in NODATA_RGB))

    fig, ax = plt.subplots(figsize=(7, 6))
    image = ax.imshow(
        np.ma.masked_invalid(grid.values),
        origin="lower",
        extent=(lon_min, lon_max, lat_min, lat_max),
        cmap=cmap,
        vmin=vmin,
        vmax=vmax,
        interpolation="nearest",
        aspect="auto",
    )
    fig.colorbar(image, ax=ax, label="Field strength [dB(uV/m)]")

    tx = grid.metadata.get("transmitter")
    if tx:
        ax.plot(tx["lon_deg"], tx["lat_deg"], marker="^", color="red", ms=9, mec="k", ls="none", label=tx["id"])
        ax.legend(loc="upper right", fontsize=8)
        default_title = f"Signal strength from {tx['id']}"
    else:
        default_title = "Signal strength"

    ax.set_xlabel("Longitude [deg]")
    ax.set_ylabel("Latitude [deg]")
    ax.set_title(title or default_title)

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    logger.info(f"Wrote coverage map: {out_path}")
    return out_path
