"""
Unit tests for reference curves, the ea estimators and fit persistence.
"""

import numpy as np
import pytest

from rmode.conductivity import MF_RMODE_EA_ROWS
from rmode.core import (
    ELORAN_PARAMS,
    MF_RMODE_PARAMS,
    FitDivergedError,
    InvalidCurveError,
    InvalidGridError,
    NoCurvesError,
    NonFiniteInputError,
    ParseError,
    PropagationParams,
)
from rmode.fitting import (
    FitResult,
    ReferenceCurve,
    SearchConfig,
    evaluate_residuals,
    fit_ea_fixed_params,
    fit_ea_table,
    fit_global,
    load_curve,
    load_fit_ea_table,
    load_params,
    profile_sse,
    save_fit_report,
    save_fit_result,
    synthesize_curve,
    write_curve,
)

R_GRID = np.linspace(10_000.0, 400_000.0, 40)


def _table_curves(params=MF_RMODE_PARAMS, offset=0.0):
    curves = []
    for sigma, ea in MF_RMODE_EA_ROWS:
        curve = synthesize_curve(sigma, params, ea, R_GRID, source_label=f"sigma={sigma:g}")
        if offset:
            curve = ReferenceCurve(sigma, curve.r_m, curve.field_dbuvm + offset, curve.source_label)
        curves.append(curve)
    return curves


class TestReferenceCurve:
    """Tests for curve construction, synthesis and the curve file format."""

    def test_synthesize_known_value(self, mf_rmode_params):
        """Test the model at 100 km over 0.005 S/m ground."""
        curve = synthesize_curve(5e-3, mf_rmode_params, 4.6e-5, [50_000.0, 100_000.0, 150_000.0])
        assert curve.field_dbuvm[1] == pytest.approx(88.976, abs=1e-9)
        assert curve.source_label == "synthetic"

    def test_synthesize_unit_range(self, mf_rmode_params):
        """Test r=1 m with ea=0 returns C."""
        curve = synthesize_curve(1.0, mf_rmode_params, 0.0, [1.0, 10.0, 100.0])
        assert curve.field_dbuvm[0] == pytest.approx(195.876, abs=1e-12)

    def test_synthesize_eloran(self):
        """Test the eLoran constants at 1 km."""
        curve = synthesize_curve(4.0, ELORAN_PARAMS, 0.0, [1_000.0, 10_000.0, 100_000.0])
        assert curve.field_dbuvm[0] == pytest.approx(129.353, abs=1e-9)

    @pytest.mark.parametrize("grid", [[1.0, 2.0], [1.0, 3.0, 2.0], [0.0, 1.0, 2.0]])
    def test_synthesize_bad_grid(self, mf_rmode_params, grid):
        """Test short, unsorted or nonpositive grids are rejected."""
        with pytest.raises(InvalidGridError):
            synthesize_curve(5e-3, mf_rmode_params, 4.6e-5, grid)

    def test_validation(self):
        """Test invalid curves raise InvalidCurveError."""
        with pytest.raises(InvalidCurveError):
            ReferenceCurve(0.0, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        with pytest.raises(InvalidCurveError):
            ReferenceCurve(1.0, [1.0, 2.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(InvalidCurveError):
            ReferenceCurve(1.0, [1.0, 2.0, 3.0], [1.0, 2.0])
        with pytest.raises(InvalidCurveError):
            ReferenceCurve(1.0, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0], weights=[0.0, 0.0, 0.0])

    def test_arrays_read_only(self):
        """Test curve samples cannot be modified in place."""
        curve = ReferenceCurve(1.0, [1.0, 2.0, 3.0], [3.0, 2.0, 1.0])
        with pytest.raises(ValueError):
            curve.field_dbuvm[0] = 0.0
        assert curve.samples == [(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]
        assert curve.sample_weights.tolist() == [1.0, 1.0, 1.0]

    def test_load_curve_km(self):
        """Test a curve file in km with a label."""
        text = b"# sigma=0.005 units=km label=grwave-300kHz\n10 112.4\n20, 105.9\n\n50 95.0\n"
        curve = load_curve(text)
        assert curve.sigma_s_per_m == 0.005
        assert curve.r_m.tolist() == [10_000.0, 20_000.0, 50_000.0]
        assert curve.field_dbuvm.tolist() == [112.4, 105.9, 95.0]
        assert curve.source_label == "grwave-300kHz"

    def test_load_curve_label_defaults_to_file(self, tmp_path):
        """Test the file path names an unlabelled curve."""
        path = tmp_path / "sea.txt"
        path.write_bytes(b"# sigma=4\n1000 120\n2000 114\n3000 110\n")
        assert load_curve(path).source_label == str(path)
        assert load_curve(path, source_label="sea").source_label == "sea"

    @pytest.mark.parametrize(
        "text",
        [
            b"1000 120\n2000 114\n3000 110\n",
            b"# sigma=4 units=mi\n1 120\n2 114\n3 110\n",
            b"# sigma=4\n1000 120\n2000 114\n",
            b"# sigma=4\n1000 120 1\n2000 114\n3000 110\n",
            b"# sigma=4\n3000 120\n2000 114\n1000 110\n",
        ],
    )
    def test_load_curve_errors(self, text):
        """Test malformed curve files raise ParseError."""
        with pytest.raises(ParseError):
            load_curve(text)

    def test_write_then_load(self, mf_rmode_params):
        """Test a written curve loads back unchanged."""
        curve = synthesize_curve(2e-3, mf_rmode_params, 1.04e-4, R_GRID, source_label="land")
        again = load_curve(write_curve(curve, units="km"))
        assert again.sigma_s_per_m == curve.sigma_s_per_m
        assert again.r_m.tolist() == pytest.approx(curve.r_m.tolist(), rel=1e-15)
        assert again.field_dbuvm.tolist() == curve.field_dbuvm.tolist()
        assert again.source_label == "land"


class TestFixedParams:
    """Tests for the closed-form ea estimator."""

    def test_recovers_ea(self, mf_rmode_params):
        """Test ea is recovered from a model-generated curve."""
        curve = synthesize_curve(5e-3, mf_rmode_params, 4.6e-5, R_GRID)
        fit = fit_ea_fixed_params(curve, mf_rmode_params)
        assert fit.ea_db_per_m == pytest.approx(4.6e-5, abs=1e-12)
        assert fit.rms_db < 1e-9

    def test_zero_attenuation(self, mf_rmode_params):
        """Test a curve generated with ea=0 fits to ea=0."""
        curve = synthesize_curve(4.0, mf_rmode_params, 0.0, R_GRID)
        assert abs(fit_ea_fixed_params(curve, mf_rmode_params).ea_db_per_m) < 1e-12

    def test_constant_shift(self, mf_rmode_params):
        """Test a +1 dB shift lowers ea by sum(r)/sum(r^2)."""
        r = np.array([1e5, 2e5, 3e5])
        field = mf_rmode_params.c_dbuvm - 10.0 * mf_rmode_params.e_exponent * np.log10(r) - 4.6e-5 * r + 1.0
        fit = fit_ea_fixed_params(ReferenceCurve(5e-3, r, field), mf_rmode_params)
        assert fit.ea_db_per_m == pytest.approx(4.6e-5 - 6e5 / 1.4e11, abs=1e-13)
        assert fit.rms_db > 0.0

    def test_closed_form_is_minimum(self, mf_rmode_params):
        """Test perturbing ea by 1e-8 never lowers the squared residual."""
        rng = np.random.default_rng(11)
        curve = synthesize_curve(2e-3, mf_rmode_params, 1.04e-4, R_GRID)
        noisy = ReferenceCurve(2e-3, curve.r_m, curve.field_dbuvm + rng.normal(0.0, 0.5, len(curve)))
        ea = fit_ea_fixed_params(noisy, mf_rmode_params).ea_db_per_m

        def sse(value):
            return float(np.sum(evaluate_residuals(noisy, mf_rmode_params, value) ** 2))

        assert sse(ea) <= sse(ea + 1e-8)
        assert sse(ea) <= sse(ea - 1e-8)

    def test_weights(self, mf_rmode_params):
        """Test zero-weight samples do not influence the fit."""
        curve = synthesize_curve(5e-3, mf_rmode_params, 4.6e-5, [1e4, 2e4, 3e4, 4e4])
        field = curve.field_dbuvm.copy()
        field[-1] += 50.0
        weighted = ReferenceCurve(5e-3, curve.r_m, field, weights=[1.0, 1.0, 1.0, 0.0])
        assert fit_ea_fixed_params(weighted, mf_rmode_params).ea_db_per_m == pytest.approx(4.6e-5, abs=1e-12)

    def test_non_finite_sample(self, mf_rmode_params):
        """Test NaN field samples raise NonFiniteInputError."""
        curve = ReferenceCurve(5e-3, [1e4, 2e4, 3e4], [100.0, float("nan"), 90.0], source_label="bad")
        with pytest.raises(NonFiniteInputError) as exc:
            fit_ea_fixed_params(curve, mf_rmode_params)
        assert exc.value.source_label == "bad"

    def test_residuals(self, mf_rmode_params):
        """Test residuals are zero on the model and -2 for a curve 2 dB high."""
        curve = synthesize_curve(5e-3, mf_rmode_params, 4.6e-5, R_GRID)
        assert np.max(np.abs(evaluate_residuals(curve, mf_rmode_params, 4.6e-5))) < 1e-9
        high = ReferenceCurve(5e-3, curve.r_m, curve.field_dbuvm + 2.0)
        assert evaluate_residuals(high, mf_rmode_params, 4.6e-5).tolist() == pytest.approx([-2.0] * len(curve), abs=1e-9)

    def test_fit_ea_table(self, mf_rmode_params, default_table):
        """Test the per-conductivity table reproduces the generating table."""
        table = fit_ea_table(list(reversed(_table_curves())), mf_rmode_params)
        assert table.sigmas.tolist() == default_table.sigmas.tolist()
        assert table.eas.tolist() == pytest.approx(default_table.eas.tolist(), abs=1e-12)

    def test_fit_ea_table_empty(self, mf_rmode_params):
        """Test an empty curve set raises NoCurvesError."""
        with pytest.raises(NoCurvesError):
            fit_ea_table([], mf_rmode_params)


class TestGlobalFit:
    """Tests for the joint (C, e, ea) estimator."""

    def test_single_curve(self, mf_rmode_params):
        """Test recovery of C, e and ea from one curve."""
        curve = synthesize_curve(5e-3, mf_rmode_params, 4.6e-5, R_GRID)
        result = fit_global([curve])
        assert result.params.c_dbuvm == pytest.approx(195.876, abs=0.01)
        assert result.params.e_exponent == pytest.approx(2.046, abs=0.001)
        assert result.ea_by_sigma[0][1] == pytest.approx(4.6e-5, abs=1e-8)
        assert result.pooled_rms_db <= 1e-6

    def test_seven_curves(self, mf_rmode_params):
        """Test recovery from all seven table conductivities."""
        result = fit_global(_table_curves())
        assert result.params.c_dbuvm == pytest.approx(195.876, abs=0.01)
        assert result.params.e_exponent == pytest.approx(2.046, abs=0.001)
        for (sigma, ea), (expected_sigma, expected_ea) in zip(result.ea_by_sigma, MF_RMODE_EA_ROWS):
            assert sigma == expected_sigma
            assert ea == pytest.approx(expected_ea, abs=1e-8)
        assert max(result.rms_by_curve) <= 1e-6
        assert result.iterations > 0
        assert result.source_labels[0] == "sigma=0.0005"

    def test_eloran_constants(self):
        """Test the estimator is not tied to one parameter set."""
        curves = [synthesize_curve(s, ELORAN_PARAMS, ea, R_GRID) for s, ea in MF_RMODE_EA_ROWS[:3]]
        result = fit_global(curves)
        assert result.params.c_dbuvm == pytest.approx(189.353, abs=0.01)
        assert result.params.e_exponent == pytest.approx(2.0, abs=0.001)

    def test_constant_offset_shifts_c(self):
        """Test adding 3 dB to every sample raises C by 3 dB only."""
        base = fit_global(_table_curves())
        shifted = fit_global(_table_curves(offset=3.0))
        assert shifted.params.c_dbuvm == pytest.approx(base.params.c_dbuvm + 3.0, abs=0.01)
        assert shifted.params.e_exponent == pytest.approx(base.params.e_exponent, abs=0.001)

    def test_order_invariance(self):
        """Test permuting the curves leaves the estimates unchanged."""
        curves = _table_curves()
        forward = fit_global(curves)
        backward = fit_global(list(reversed(curves)))
        assert backward.params.c_dbuvm == pytest.approx(forward.params.c_dbuvm, abs=1e-6)
        assert backward.params.e_exponent == pytest.approx(forward.params.e_exponent, abs=1e-7)
        backward_ea = [ea for _, ea in sorted(backward.ea_by_sigma)]
        forward_ea = [ea for _, ea in sorted(forward.ea_by_sigma)]
        assert backward_ea == pytest.approx(forward_ea, abs=1e-10)

    def test_profile_sse(self, mf_rmode_params):
        """Test the profiled SSE vanishes at the generating constants only."""
        curves = _table_curves()
        assert profile_sse(curves, mf_rmode_params) < 1e-18
        assert profile_sse(curves, PropagationParams(195.0, 2.046)) > 1e-3

    def test_empty(self):
        """Test an empty curve set raises NoCurvesError."""
        with pytest.raises(NoCurvesError):
            fit_global([])

    def test_non_finite(self):
        """Test a NaN sample raises NonFiniteInputError."""
        curve = ReferenceCurve(5e-3, [1e4, 2e4, 3e4], [100.0, 95.0, float("inf")])
        with pytest.raises(NonFiniteInputError):
            fit_global([curve])

    def test_exponent_out_of_range(self):
        """Test an optimum with e >= 4 raises FitDivergedError naming the curve."""
        field = 200.0 - 45.0 * np.log10(R_GRID) - 1e-5 * R_GRID
        curve = ReferenceCurve(5e-3, R_GRID, field, "steep-decay")
        with pytest.raises(FitDivergedError) as exc:
            fit_global([curve])
        assert exc.value.source_label == "steep-decay"

    def test_search_config_validation(self):
        """Test inconsistent search bounds are rejected."""
        with pytest.raises(ValueError):
            SearchConfig(c_min=200.0, c_max=150.0)
        with pytest.raises(ValueError):
            SearchConfig(e_min=1.5, e_max=4.5)
        with pytest.raises(ValueError):
            SearchConfig(c_steps=1)

    @pytest.mark.slow
    def test_parallel_grid_matches_sequential(self):
        """Test joblib grid evaluation gives the same fit."""
        curves = _table_curves()[:3]
        sequential = fit_global(curves)
        parallel = fit_global(curves, SearchConfig(n_jobs=2))
        assert parallel.grid_best == sequential.grid_best
        assert parallel.params == sequential.params


class TestFitResult:
    """Tests for FitResult conversion and persistence."""

    def _result(self):
        return FitResult(
            params=PropagationParams(195.9, 2.05),
            ea_by_sigma=[(5e-3, 4.6e-5), (4.0, -5.4e-7)],
            rms_by_curve=[0.01, 0.02],
            pooled_rms_db=0.015,
            iterations=42,
            sse=0.5,
            source_labels=["land", "sea"],
        )

    def test_to_ea_table(self):
        """Test the ea table is sorted by conductivity."""
        table = FitResult(
            params=MF_RMODE_PARAMS,
            ea_by_sigma=[(4.0, -5.4e-7), (5e-3, 4.6e-5)],
            rms_by_curve=[0.0, 0.0],
            pooled_rms_db=0.0,
            iterations=1,
        ).to_ea_table()
        assert table.rows == ((5e-3, 4.6e-5), (4.0, -5.4e-7))

    def test_duplicate_sigma_table(self):
        """Test curves sharing a conductivity cannot form a table."""
        result = self._result()
        result.ea_by_sigma = [(5e-3, 4.6e-5), (5e-3, 4.7e-5)]
        with pytest.raises(ValueError):
            result.to_ea_table()

    def test_to_dict(self):
        """Test the serialized layout."""
        data = self._result().to_dict()
        assert data["c_dbuvm"] == 195.9
        assert data["iterations"] == 42
        assert data["curves"][1] == {
            "sigma_s_per_m": 4.0,
            "ea_db_per_m": -5.4e-7,
            "rms_db": 0.02,
            "source_label": "sea",
        }

    def test_report(self):
        """Test the text report names C, e and every curve."""
        report = self._result().report()
        assert "C            = 195.900000" in report
        assert "land" in report and "sea" in report

    def test_yaml_round_trip(self, tmp_path):
        """Test a saved fit is usable as params and as an ea table."""
        result = self._result()
        path = save_fit_result(result, tmp_path / "out" / "fit_result.yaml")
        assert load_params(path) == result.params
        assert load_fit_ea_table(path).rows == result.to_ea_table().rows

    def test_report_file(self, tmp_path):
        """Test the report file matches report()."""
        result = self._result()
        path = save_fit_report(result, tmp_path / "fit_report.txt")
        assert path.read_text(encoding="utf-8") == result.report()

    def test_load_params_errors(self, tmp_path):
        """Test missing files and malformed YAML."""
        with pytest.raises(FileNotFoundError):
            load_params(tmp_path / "missing.yaml")
        bad = tmp_path / "bad.yaml"
        bad.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ParseError):
            load_params(bad)
        with pytest.raises(ParseError):
            load_fit_ea_table(bad)
