"""
Unit tests for coverage sweeps and grid exporters.
"""

import io
import math

import numpy as np
import pytest
from PIL import Image

from rmode.conductivity import ConductivityRaster, read_grid
from rmode.core import GridEncodingError, InvalidGridSpecError
from rmode.coverage import (
    CSV_HEADER,
    NODATA_RGB,
    CoverageGrid,
    GridFormat,
    GridSpec,
    colorize,
    compute_coverage,
    export_grid,
    write_grid_files,
)
from rmode.coverage.plotting import render_coverage_map
from rmode.geo import EARTH_RADIUS_M, GeoPoint, great_circle_distance
from rmode.propagation import Transmitter, field_strength_homogeneous


def _three_by_three() -> GridSpec:
    """3x3 grid of 0.1 degree cells centered on (0, 0)."""
    return GridSpec(lat_min=-0.15, lon_min=-0.15, cell_size_deg=0.1, n_rows=3, n_cols=3)


class TestGridSpec:
    """Tests for GridSpec."""

    def test_zero_columns(self):
        """Test an empty grid is rejected."""
        with pytest.raises(InvalidGridSpecError):
            GridSpec(lat_min=0.0, lon_min=0.0, cell_size_deg=0.1, n_rows=3, n_cols=0)

    def test_bad_cell_size(self):
        """Test nonpositive cell sizes are rejected."""
        with pytest.raises(InvalidGridSpecError):
            GridSpec(lat_min=0.0, lon_min=0.0, cell_size_deg=0.0, n_rows=1, n_cols=1)
        with pytest.raises(ValueError):
            GridSpec(lat_min=89.0, lon_min=0.0, cell_size_deg=1.0, n_rows=3, n_cols=1)

    def test_from_bounds(self):
        """Test cell counts derived from bounds."""
        spec = GridSpec.from_bounds(34.0, 36.0, 125.0, 127.5, 0.5)
        assert spec.shape == (4, 5)
        assert spec.bounds == (34.0, 36.0, 125.0, 127.5)
        with pytest.raises(InvalidGridSpecError):
            GridSpec.from_bounds(34.0, 35.3, 125.0, 127.5, 0.5)

    def test_cell_centers(self):
        """Test cell centers sit half a cell inside the edges."""
        spec = _three_by_three()
        center = spec.cell_center(1, 1)
        assert center.lat_deg == pytest.approx(0.0, abs=1e-15)
        assert center.lon_deg == pytest.approx(0.0, abs=1e-15)
        assert spec.center_lats().tolist() == pytest.approx([-0.1, 0.0, 0.1], abs=1e-15)


class TestComputeCoverage:
    """Tests for compute_coverage."""

    def test_uniform_matches_homogeneous(self, mf_rmode_params, equator_tx, uniform_raster, default_table):
        """Test every cell over uniform ground matches the homogeneous model."""
        spec = _three_by_three()
        grid = compute_coverage(equator_tx, uniform_raster, default_table, mf_rmode_params, spec)
        for row in range(3):
            for col in range(3):
                if (row, col) == (1, 1):
                    continue
                r = great_circle_distance(equator_tx.location, spec.cell_center(row, col))
                expected = field_strength_homogeneous(r, mf_rmode_params, 4.6e-5)
                assert grid.values[row, col] == pytest.approx(expected, abs=1e-6)

    def test_transmitter_cell_clamped(self, mf_rmode_params, equator_tx, uniform_raster, default_table):
        """Test the transmitter's own cell is evaluated at 1 m."""
        grid = compute_coverage(equator_tx, uniform_raster, default_table, mf_rmode_params, _three_by_three())
        assert grid.values[1, 1] == pytest.approx(195.876 - 4.6e-5, abs=1e-9)
        assert grid.metadata["near_field_cells"] == 1
        assert grid.metadata["failed_cells"] == 0

    def test_symmetry(self, mf_rmode_params, equator_tx, uniform_raster, default_table):
        """Test corners agree and the grid is east-west symmetric."""
        grid = compute_coverage(equator_tx, uniform_raster, default_table, mf_rmode_params, _three_by_three())
        corners = [grid.values[0, 0], grid.values[0, 2], grid.values[2, 0], grid.values[2, 2]]
        assert corners == pytest.approx([corners[0]] * 4, abs=1e-9)
        assert grid.values[:, 0].tolist() == pytest.approx(grid.values[:, 2].tolist(), abs=1e-9)

    def test_decreases_with_range(self, mf_rmode_params, equator_tx, uniform_raster, default_table):
        """Test field strength falls off eastward over uniform ground."""
        spec = GridSpec(lat_min=-0.05, lon_min=0.05, cell_size_deg=0.1, n_rows=1, n_cols=20)
        grid = compute_coverage(equator_tx, uniform_raster, default_table, mf_rmode_params, spec)
        assert np.all(np.diff(grid.values[0]) < 0)

    def test_sea_beyond_land(self, mf_rmode_params, equator_tx, two_zone_raster, default_table):
        """Test cells past the coastline lie between the all-land and all-sea fields."""
        spec = GridSpec(lat_min=-0.05, lon_min=1.0, cell_size_deg=0.1, n_rows=1, n_cols=8)
        mixed = compute_coverage(equator_tx, two_zone_raster, default_table, mf_rmode_params, spec).values
        land = compute_coverage(equator_tx, ConductivityRaster.uniform(5e-3), default_table, mf_rmode_params, spec).values
        sea = compute_coverage(equator_tx, ConductivityRaster.uniform(4.0), default_table, mf_rmode_params, spec).values
        assert np.all(land < mixed)
        assert np.all(mixed < sea)

    def test_farther_sea_cell_can_be_stronger(self, mf_rmode_params, two_zone_rx, two_zone_raster, default_table):
        """Test a coastal transmitter reaches farther over sea than over land."""
        coast_lon = two_zone_rx.lon_deg / 2.0
        tx = Transmitter(id="COAST", location=GeoPoint(0.0, coast_lon))
        spec = GridSpec(lat_min=-0.05, lon_min=coast_lon - 0.5, cell_size_deg=0.1, n_rows=1, n_cols=12)
        grid = compute_coverage(tx, two_zone_raster, default_table, mf_rmode_params, spec)

        distances = [great_circle_distance(tx.location, spec.cell_center(0, col)) for col in range(spec.n_cols)]
        values = grid.values[0]
        inversions = [
            (i, j)
            for i in range(spec.n_cols)
            for j in range(spec.n_cols)
            if distances[j] > distances[i] and values[j] > values[i]
        ]
        assert inversions

    def test_failed_cells(self, mf_rmode_params, equator_tx, two_zone_raster, default_table):
        """Test strict lookups outside the raster leave NaN cells and the sweep continues."""
        spec = GridSpec(lat_min=-0.1, lon_min=1.5, cell_size_deg=0.2, n_rows=1, n_cols=4)
        grid = compute_coverage(
            equator_tx, two_zone_raster, default_table, mf_rmode_params, spec, policy="exact_only"
        )
        assert np.isfinite(grid.values[0, :2]).all()
        assert np.isnan(grid.values[0, 2:]).all()
        summary = grid.summary()
        assert summary["failed_cells"] == 2
        assert summary["cells"] == 4

    def test_fallback_cells(self, mf_rmode_params, equator_tx, two_zone_raster, default_table):
        """Test cells reached through the fallback are counted."""
        spec = GridSpec(lat_min=-0.1, lon_min=1.5, cell_size_deg=0.2, n_rows=1, n_cols=4)
        grid = compute_coverage(equator_tx, two_zone_raster, default_table, mf_rmode_params, spec)
        assert np.isfinite(grid.values).all()
        assert grid.metadata["fallback_cells"] == 2
        assert grid.metadata["fallback_steps"] > 0

    def test_metadata(self, mf_rmode_params, equator_tx, uniform_raster, default_table):
        """Test run provenance is recorded."""
        grid = compute_coverage(equator_tx, uniform_raster, default_table, mf_rmode_params, _three_by_three())
        meta = grid.metadata
        assert meta["transmitter"]["id"] == "EQ"
        assert meta["params"] == mf_rmode_params.to_dict()
        assert meta["ea_table_hash"] == default_table.content_hash()
        assert meta["policy"] == "loglin_interp"
        assert meta["fallback_sigma"] == 4.0
        assert meta["grid"]["n_rows"] == 3

    def test_rejects_non_spec(self, mf_rmode_params, equator_tx, uniform_raster, default_table):
        """Test the grid argument must be a GridSpec."""
        with pytest.raises(InvalidGridSpecError):
            compute_coverage(equator_tx, uniform_raster, default_table, mf_rmode_params, (0.0, 0.0, 0.1, 3, 3))

    @pytest.mark.slow
    def test_parallel_matches_sequential(self, mf_rmode_params, equator_tx, two_zone_raster, default_table):
        """Test joblib workers produce bit-identical grids."""
        spec = GridSpec(lat_min=-0.5, lon_min=-0.05, cell_size_deg=0.1, n_rows=10, n_cols=20)
        sequential = compute_coverage(equator_tx, two_zone_raster, default_table, mf_rmode_params, spec)
        parallel = compute_coverage(equator_tx, two_zone_raster, default_table, mf_rmode_params, spec, n_jobs=2)
        assert np.array_equal(sequential.values, parallel.values, equal_nan=True)

    def test_repeat_runs_export_identically(self, mf_rmode_params, equator_tx, two_zone_raster, default_table):
        """Test identical inputs give byte-identical csv and esri_ascii exports."""
        spec = GridSpec(lat_min=-0.25, lon_min=-0.25, cell_size_deg=0.1, n_rows=5, n_cols=12)
        first = compute_coverage(equator_tx, two_zone_raster, default_table, mf_rmode_params, spec)
        second = compute_coverage(equator_tx, two_zone_raster, default_table, mf_rmode_params, spec)
        for fmt in ("csv", "esri_ascii"):
            assert export_grid(first, fmt) == export_grid(second, fmt)

    @pytest.mark.slow
    def test_large_grid_exports_match_across_workers(self, mf_rmode_params, equator_tx, two_zone_raster, default_table):
        """Test a 200x200 sweep exports the same bytes sequentially and with two workers."""
        spec = GridSpec(lat_min=-1.0, lon_min=-0.3, cell_size_deg=0.01, n_rows=200, n_cols=200)
        sequential = compute_coverage(equator_tx, two_zone_raster, default_table, mf_rmode_params, spec)
        parallel = compute_coverage(equator_tx, two_zone_raster, default_table, mf_rmode_params, spec, n_jobs=2)
        assert sequential.metadata["fallback_cells"] > 0
        assert sequential.metadata["failed_cells"] == 0
        for fmt in ("csv", "esri_ascii"):
            assert export_grid(sequential, fmt) == export_grid(parallel, fmt)


class TestCoverageGrid:
    """Tests for the CoverageGrid container."""

    def test_shape_mismatch(self):
        """Test values must match the grid shape."""
        with pytest.raises(InvalidGridSpecError):
            CoverageGrid(spec=_three_by_three(), values=np.zeros((2, 3)))

    def test_infinite_values(self):
        """Test infinite values are rejected."""
        values = np.zeros((3, 3))
        values[0, 0] = np.inf
        with pytest.raises(ValueError):
            CoverageGrid(spec=_three_by_three(), values=values)

    def test_summary_all_failed(self):
        """Test the summary of a grid without valid cells."""
        grid = CoverageGrid(spec=_three_by_three(), values=np.full((3, 3), np.nan))
        summary = grid.summary()
        assert summary["min_field_dbuvm"] is None
        assert summary["failed_cells"] == 9


class TestExport:
    """Tests for CSV, ESRI ASCII and PNG encoders."""

    def _grid(self) -> CoverageGrid:
        spec = GridSpec(lat_min=35.0, lon_min=129.0, cell_size_deg=0.5, n_rows=2, n_cols=2)
        return CoverageGrid(spec=spec, values=np.array([[40.0, np.nan], [88.976, 120.0]]))

    def test_single_cell_csv(self, mf_rmode_params, equator_tx, uniform_raster, default_table):
        """Test a 1x1 grid 100 km east of the transmitter."""
        lon = math.degrees(100_000.0 / EARTH_RADIUS_M)
        spec = GridSpec(lat_min=-0.05, lon_min=lon - 0.05, cell_size_deg=0.1, n_rows=1, n_cols=1)
        grid = compute_coverage(equator_tx, uniform_raster, default_table, mf_rmode_params, spec)
        lines = export_grid(grid, "csv").decode("utf-8").splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 2
        assert float(lines[1].split(",")[2]) == pytest.approx(88.976, abs=1e-6)

    def test_csv_order(self):
        """Test CSV rows run north to south then west to east."""
        lines = export_grid(self._grid(), GridFormat.CSV).decode("utf-8").splitlines()
        assert lines == [
            "lat,lon,field_dBuVm",
            "35.75,129.25,88.976",
            "35.75,129.75,120.0",
            "35.25,129.25,40.0",
            "35.25,129.75,NaN",
        ]

    def test_esri_round_trip(self):
        """Test an ESRI export reads back with NaN for failed cells."""
        grid = self._grid()
        geometry, values, nodata = read_grid(export_grid(grid, "esri_ascii"))
        assert (geometry.origin_lat_deg, geometry.origin_lon_deg) == (35.0, 129.0)
        assert geometry.cell_size_deg == 0.5
        assert (geometry.n_rows, geometry.n_cols) == (2, 2)
        restored = np.where(values == nodata, np.nan, values)
        assert np.array_equal(restored, grid.values, equal_nan=True)

    def test_all_nan(self):
        """Test an all-failed grid exports as NODATA and gray pixels."""
        spec = GridSpec(lat_min=0.0, lon_min=0.0, cell_size_deg=1.0, n_rows=2, n_cols=3)
        grid = CoverageGrid(spec=spec, values=np.full((2, 3), np.nan))

        text = export_grid(grid, "esri_ascii").decode("utf-8").splitlines()
        assert text[5] == "NODATA_value -9999.0"
        assert text[6:] == ["-9999.0 -9999.0 -9999.0"] * 2

        image = Image.open(io.BytesIO(export_grid(grid, "png")))
        pixels = np.asarray(image.convert("RGB"))
        assert pixels.shape == (2, 3, 3)
        assert (pixels == np.array(NODATA_RGB, dtype=np.uint8)).all()

    def test_png_layout(self):
        """Test one pixel per cell with the northern row on top."""
        image = Image.open(io.BytesIO(export_grid(self._grid(), "png")))
        assert image.size == (2, 2)
        assert image.mode == "RGB"
        pixels = np.asarray(image)
        expected = colorize(np.array([[88.976, 120.0], [40.0, np.nan]]), 40.0, 120.0)
        assert np.array_equal(pixels, expected)

    def test_colorize_clips(self):
        """Test values beyond the scale take the ramp end colors."""
        rgb = colorize(np.array([0.0, 40.0, 120.0, 200.0]), 40.0, 120.0)
        assert rgb[0].tolist() == rgb[1].tolist()
        assert rgb[2].tolist() == rgb[3].tolist()
        assert rgb[1].tolist() != rgb[2].tolist()

    def test_encoding_errors(self):
        """Test unknown formats and bad scales raise GridEncodingError."""
        with pytest.raises(GridEncodingError):
            export_grid(self._grid(), "geotiff")
        with pytest.raises(GridEncodingError):
            export_grid(self._grid(), "png", vmin=100.0, vmax=50.0)

    def test_write_grid_files(self, tmp_path):
        """Test every requested format is written next to each other."""
        written = write_grid_files(self._grid(), tmp_path / "out", "tx1", ["csv", "esri_ascii", "png"])
        assert sorted(written) == ["csv", "esri_ascii", "png"]
        assert written["esri_ascii"].name == "tx1.asc"
        assert all(path.stat().st_size > 0 for path in written.values())

    def test_render_coverage_map(self, tmp_path):
        """Test the annotated map figure is written."""
        grid = self._grid()
        grid.metadata["transmitter"] = {"id": "TX", "lat_deg": 35.5, "lon_deg": 129.5, "power_offset_db": 0.0}
        path = render_coverage_map(grid, tmp_path / "map.png")
        assert path.exists()
        assert Image.open(path).size[0] > 100
