"""
Shared test fixtures and configuration for pytest.
"""

import logging

import numpy as np
import pytest

from rmode.conductivity import ConductivityRaster, EaTable, RasterGeometry
from rmode.core import MF_RMODE_PARAMS
from rmode.geo import EARTH_RADIUS_M, GeoPoint
from rmode.propagation import Transmitter


logger = logging.getLogger(__name__)

# Two-zone path: 200 km due east along the equator, land/sea boundary halfway.
TWO_ZONE_PATH_M = 200_000.0
TWO_ZONE_CELL_DEG = 0.05
TWO_ZONE_LAND_SIGMA = 5e-3
TWO_ZONE_SEA_SIGMA = 4.0


# ============================================================================
# Pytest hooks
# ============================================================================

def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "unit: Unit tests (no external dependencies)")
    config.addinivalue_line("markers", "integration: CLI runs against temporary files")
    config.addinivalue_line("markers", "slow: Tests that take a long time to run")


# ============================================================================
# Fixtures
# ============================================================================

@pytest.fixture(scope="session")
def mf_rmode_params():
    """MF R-Mode model constants (C=195.876, e=2.046)."""
    return MF_RMODE_PARAMS


@pytest.fixture(scope="session")
def default_table() -> EaTable:
    """Built-in conductivity to ea table."""
    return EaTable.default()


@pytest.fixture(scope="session")
def uniform_raster() -> ConductivityRaster:
    """Whole-globe raster of sigma=0.005 S/m."""
    return ConductivityRaster.uniform(5e-3)


@pytest.fixture(scope="session")
def equator_tx() -> Transmitter:
    """Transmitter at (0, 0)."""
    return Transmitter(id="EQ", location=GeoPoint(0.0, 0.0))


@pytest.fixture(scope="session")
def two_zone_rx() -> GeoPoint:
    """Receiver 200 km due east of (0, 0)."""
    return GeoPoint(0.0, np.degrees(TWO_ZONE_PATH_M / EARTH_RADIUS_M))


@pytest.fixture(scope="session")
def two_zone_raster(two_zone_rx) -> ConductivityRaster:
    """
    Land (0.005 S/m) west of the path midpoint and sea (4 S/m) east of it.

    A column edge sits exactly on the midpoint meridian.
    """
    mid_lon = two_zone_rx.lon_deg / 2.0
    n_west = 20
    geometry = RasterGeometry(
        origin_lat_deg=-1.0,
        origin_lon_deg=mid_lon - n_west * TWO_ZONE_CELL_DEG,
        cell_size_deg=TWO_ZONE_CELL_DEG,
        n_rows=40,
        n_cols=2 * n_west,
    )
    cells = np.full(geometry.shape, TWO_ZONE_SEA_SIGMA)
    cells[:, :n_west] = TWO_ZONE_LAND_SIGMA
    return ConductivityRaster(geometry=geometry, cells=cells)
