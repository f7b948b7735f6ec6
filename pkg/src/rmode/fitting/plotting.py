"""
Fit diagnostics: reference samples against the fitted model.
"""

from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..core.logging import get_logger  # noqa: E402
from ..core.types import PropagationParams  # noqa: E402
from ..propagation.model import homogeneous_model  # noqa: E402
from .curves import ReferenceCurve  # noqa: E402

logger = get_logger(__name__)


def plot_fit_comparison(
    curve: ReferenceCurve,
    params: PropagationParams,
    ea_db_per_m: float,
    out_path: Union[str, Path],
    title: Optional[str] = None,
) -> Path:
    """
    Save a PNG with the reference curve, the fitted model and residuals.

    Returns:
        Path of the written figure
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    r_km = curve.r_m / 1000.0
    model = homogeneous_model(curve.r_m, params, ea_db_per_m)

    fig, (ax, ax_res) = plt.subplots(
        2, 1, figsize=(7, 6), sharex=True, gridspec_kw={"height_ratios": [3, 1]}
    )
    ax.plot(r_km, curve.field_dbuvm, "o", ms=3, label=curve.source_label or "reference")
    ax.plot(r_km, model, "-", lw=1.2, label=f"C={params.c_dbuvm:.3f}, e={params.e_exponent:.3f}, ea={ea_db_per_m:.3e}")
    ax.set_ylabel("Field strength [dB(uV/m)]")
    ax.set_title(title or f"sigma = {curve.sigma_s_per_m:g} S/m")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)

    ax_res.plot(r_km, model - curve.field_dbuvm, ".", ms=3)
    ax_res.axhline(0.0, color="k", lw=0.6)
    ax_res.set_xlabel("Distance [km]")
    ax_res.set_ylabel("Residual [dB]")
    ax_res.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    logger.debug(f"Wrote fit plot: {out_path} (max |residual| {np.max(np.abs(model - curve.field_dbuvm)):.3e} dB)")
    return out_path
