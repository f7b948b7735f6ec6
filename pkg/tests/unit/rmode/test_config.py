"""
Unit tests for run configuration loading and validation.
"""

from pathlib import Path

import pytest
import yaml

from rmode.config import OUTPUT_DIR_ENV, RunConfig, parse_distance
from rmode.core import ConfigError

CONFIG_DIR = Path(__file__).parents[3] / "config"


class TestParseDistance:
    """Tests for parse_distance."""

    @pytest.mark.parametrize(
        "text, expected",
        [("250", 250.0), ("250m", 250.0), ("0.5km", 500.0), (" 1e3 m ", 1000.0), (125, 125.0)],
    )
    def test_valid(self, text, expected):
        """Test meters and km suffixes."""
        assert parse_distance(text) == expected

    @pytest.mark.parametrize("text", ["", "km", "5 miles", "1,5km"])
    def test_invalid(self, text):
        """Test unparseable distances raise ValueError."""
        with pytest.raises(ValueError):
            parse_distance(text)


class TestRunConfig:
    """Tests for RunConfig."""

    def test_defaults(self):
        """Test built-in defaults."""
        config = RunConfig()
        assert config.params_preset == "mf_rmode"
        assert config.ea_policy == "loglin_interp"
        assert config.fallback_sigma == 4.0
        assert config.output_formats == ["csv"]

    def test_unknown_key(self):
        """Test unknown keys are rejected."""
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"tx_lat": 1.0, "antenna_height": 30})

    def test_type_coercion(self):
        """Test numeric strings and distance suffixes are coerced."""
        config = RunConfig.from_dict({"tx_lat": "36.5", "grid_n_rows": 10.0, "max_step_m": "0.25km", "output_formats": "png"})
        assert config.tx_lat == 36.5
        assert config.grid_n_rows == 10
        assert config.max_step_m == 250.0
        assert config.output_formats == ["png"]

    def test_bad_types(self):
        """Test values of the wrong type raise ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"tx_lat": "north"})
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"grid_n_rows": 2.5})

    def test_relative_paths_resolve_against_file(self, tmp_path):
        """Test relative paths in a config file are resolved from its directory."""
        (tmp_path / "tables").mkdir()
        table = tmp_path / "tables" / "ea.txt"
        table.write_text("5e-3 4.6e-5\n", encoding="utf-8")
        path = tmp_path / "run.yaml"
        path.write_text("ea_table: tables/ea.txt\ntx_lat: 1\ntx_lon: 2\nuniform_sigma: 0.005\n", encoding="utf-8")
        config = RunConfig.from_file(path)
        assert Path(config.ea_table) == table.resolve()
        config.validate()

    def test_missing_file(self, tmp_path):
        """Test a missing config file raises ConfigError."""
        with pytest.raises(ConfigError):
            RunConfig.from_file(tmp_path / "absent.yaml")

    def test_not_a_mapping(self, tmp_path):
        """Test a YAML list is rejected."""
        path = tmp_path / "run.yaml"
        path.write_text("- a\n- b\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            RunConfig.from_file(path)

    def test_dump_round_trip(self):
        """Test the dumped YAML reproduces the config."""
        config = RunConfig(tx_lat=36.8, tx_lon=128.6, uniform_sigma=0.005, output_formats=["csv", "png"], max_step_m=250.0)
        assert RunConfig.from_dict(yaml.safe_load(config.dump())) == config

    def test_env_override(self):
        """Test RMODE_OUTPUT_DIR replaces output_dir."""
        config = RunConfig()
        assert config.apply_env({OUTPUT_DIR_ENV: "/tmp/rmode-out"}).output_dir == "/tmp/rmode-out"
        assert config.apply_env({}).output_dir == "output"

    def test_with_overrides_skips_none(self):
        """Test None overrides keep existing values."""
        config = RunConfig(tx_lat=1.0).with_overrides(tx_lat=None, tx_lon=2.0)
        assert (config.tx_lat, config.tx_lon) == (1.0, 2.0)

    def test_validate_missing_file(self, tmp_path):
        """Test a referenced file that does not exist is named in the error."""
        config = RunConfig(tx_lat=0.0, tx_lon=0.0, conductivity_raster=str(tmp_path / "none.asc"))
        with pytest.raises(ConfigError) as exc:
            config.validate()
        assert "conductivity_raster" in str(exc.value)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"ea_policy": "cubic"},
            {"output_formats": ["geotiff"]},
            {"c_dbuvm": 195.0},
            {"uniform_sigma": -1.0},
            {"fallback_sigma": 0.0},
            {"png_vmin": 120.0, "png_vmax": 40.0},
            {"n_jobs": 0},
            {"tx_lat": None},
        ],
    )
    def test_validate_rejects(self, overrides):
        """Test invalid settings raise ConfigError."""
        base = {"tx_lat": 0.0, "tx_lon": 0.0, "uniform_sigma": 0.005}
        base.update(overrides)
        with pytest.raises(ConfigError):
            RunConfig(**base).validate()

    def test_validate_requires_ground(self):
        """Test point and coverage runs need a raster or a uniform conductivity."""
        with pytest.raises(ConfigError):
            RunConfig(tx_lat=0.0, tx_lon=0.0).validate()
        RunConfig(tx_lat=0.0, tx_lon=0.0).validate(require_transmitter=False)

    def test_grid_spec(self):
        """Test the grid keys build a GridSpec."""
        config = RunConfig(grid_lat_min=34.0, grid_lon_min=125.5, grid_cell_size_deg=0.05, grid_n_rows=100, grid_n_cols=100)
        assert config.grid_spec().shape == (100, 100)
        with pytest.raises(ConfigError):
            RunConfig(grid_lat_min=34.0).grid_spec()
        with pytest.raises(ConfigError):
            RunConfig(grid_lat_min=34.0, grid_lon_min=0.0, grid_cell_size_deg=0.1, grid_n_rows=1, grid_n_cols=0).grid_spec()

    def test_transmitter(self):
        """Test the transmitter keys build a Transmitter."""
        tx = RunConfig(transmitter_id="PH", tx_lat=36.0, tx_lon=129.4, power_offset_db=2.0).transmitter()
        assert tx.id == "PH"
        assert tx.power_offset_db == 2.0
        with pytest.raises(ConfigError):
            RunConfig(tx_lat=95.0, tx_lon=0.0).transmitter()

    def test_shipped_example(self):
        """Test the shipped example config loads and validates."""
        config = RunConfig.from_file(CONFIG_DIR / "run.example.yaml")
        config.validate(require_grid=True)
        assert config.grid_spec().shape == (100, 100)
        assert config.output_formats == ["csv", "esri_ascii", "png"]
