import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tarp.metrics import (
    auc_score,
    calibration_msd,
    evaluate_classification,
    evaluate_regression,
    frequentist_interval,
)


class TestEvaluateRegression:
    def test_hand_computed_example(self):
        report = evaluate_regression(
            pred=[0.0, 0.0, 0.0],
            intervals=[(-0.5, 0.5)] * 3,
            y_true=[0.0, 1.0, 2.0],
        )
        assert report.mspe == pytest.approx(5.0 / 3.0)
        assert report.ecp == pytest.approx(1.0 / 3.0)
        assert report.mean_width == pytest.approx(1.0)

    def test_perfect_prediction(self):
        y = np.array([1.0, 2.0, 3.0])
        report = evaluate_regression(y, np.column_stack([y - 1, y + 1]), y)
        assert report.mspe == 0.0

    def test_total_coverage(self):
        y = np.array([-5.0, 0.0, 5.0])
        report = evaluate_regression(np.zeros(3), [(-10, 10)] * 3, y)
        assert report.ecp == 1.0

    def test_boundary_counts_as_covered(self):
        report = evaluate_regression([0.0], [(0.0, 1.0)], [0.0])
        assert report.ecp == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate_regression([0.0, 1.0], [(0, 1)], [0.0])

    @given(st.floats(-50, 50), st.integers(0, 500))
    @settings(max_examples=30, deadline=None)
    def test_translation_invariance(self, shift, seed):
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(20)
        pred = rng.standard_normal(20)
        base = evaluate_regression(pred, np.column_stack([pred - 1, pred + 1]), y)
        moved = evaluate_regression(
            pred + shift,
            np.column_stack([pred + shift - 1, pred + shift + 1]),
            y + shift,
        )
        assert moved.mspe == pytest.approx(base.mspe, rel=1e-9, abs=1e-9)


class TestAuc:
    def test_perfect_separation(self):
        report = evaluate_classification(
            [0.1, 0.2, 0.8, 0.9], [0.0, 0.0, 1.0, 1.0]
        )
        assert report.misclassification_rate == 0.0
        assert report.auc == 1.0

    def test_random_probabilities_near_half(self):
        rng = np.random.default_rng(0)
        prob = rng.random(100_000)
        y = (rng.random(100_000) < 0.5).astype(float)
        assert auc_score(prob, y) == pytest.approx(0.5, abs=0.01)

    def test_ties_get_half_credit(self):
        assert auc_score([0.5, 0.5, 0.5, 0.5], [0, 0, 1, 1]) == 0.5

    def test_single_class_undefined(self):
        report = evaluate_classification([0.2, 0.8], [1.0, 1.0])
        assert report.auc is None
        assert not report.auc_defined

    @given(st.integers(0, 500))
    @settings(max_examples=30, deadline=None)
    def test_invariance_under_monotone_transform(self, seed):
        rng = np.random.default_rng(seed)
        prob = rng.random(40)
        y = (rng.random(40) < 0.5).astype(float)
        if y.min() == y.max():
            return
        transformed = 1.0 / (1.0 + np.exp(-(3.0 * prob - 1.0)))  # strictly increasing
        assert auc_score(prob, y) == pytest.approx(
            auc_score(transformed, y), abs=1e-12
        )


class TestCalibrationMsd:
    def test_exact_probabilities_on_balanced_classes(self):
        # bins 1 and 10 occupied: ((0-0.05)^2 + (1-0.95)^2) / 2
        y = np.array([0.0, 0.0, 1.0, 1.0])
        assert calibration_msd(y, y) == pytest.approx(0.0025)

    def test_empty_bins_skipped(self):
        prob = np.array([0.55, 0.55, 0.55, 0.55])
        y = np.array([1.0, 0.0, 1.0, 0.0])
        # single occupied bin [0.5, 0.6): (0.5 - 0.55)^2
        assert calibration_msd(prob, y) == pytest.approx(0.0025)

    def test_top_bin_closed_at_one(self):
        assert calibration_msd(np.array([1.0]), np.array([1.0])) == pytest.approx(
            (1.0 - 0.95) ** 2
        )


class TestEvaluateClassification:
    def test_threshold_moves_misclassification(self):
        prob = np.array([0.4, 0.6])
        y = np.array([0.0, 0.0])
        assert evaluate_classification(prob, y).misclassification_rate == 0.5
        assert (
            evaluate_classification(prob, y, threshold=0.7).misclassification_rate
            == 0.0
        )

    def test_rejects_out_of_range_probabilities(self):
        with pytest.raises(ValueError):
            evaluate_classification([1.2], [1.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate_classification([0.5, 0.5], [1.0])

    def test_report_serializes(self):
        report = evaluate_classification([0.1, 0.9], [0.0, 1.0])
        payload = report.to_dict()
        assert set(payload) == {"misclassification_rate", "auc", "msd_calibration"}
        assert "auc" in report.to_json()
        assert report.to_csv_row().count(",") == 2

    def test_regression_report_csv_row(self):
        report = evaluate_regression([0.0], [(0.0, 1.0)], [0.5])
        assert report.to_csv_row() == "0.25,1.0,1.0"


class TestFrequentistInterval:
    def test_normal_limit(self):
        half = frequentist_interval(4.0, leverage=0.0, df=10**6, level=0.5)
        assert half == pytest.approx(0.6744897501960817 * 2.0, rel=1e-4)

    def test_mse_scaling(self):
        a = frequentist_interval(1.0, 0.3, 25, 0.5)
        b = frequentist_interval(2.0, 0.3, 25, 0.5)
        assert b == pytest.approx(np.sqrt(2.0) * a)

    def test_width_diverges_as_level_approaches_one(self):
        widths = [
            frequentist_interval(1.0, 0.0, 10, level)
            for level in (0.5, 0.99, 0.999999, 1 - 1e-12)
        ]
        assert all(a < b for a, b in zip(widths, widths[1:]))
        assert widths[-1] > 40.0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            frequentist_interval(1.0, 0.0, 10, 1.5)
        with pytest.raises(ValueError):
            frequentist_interval(1.0, -0.1, 10, 0.5)
        with pytest.raises(ValueError):
            frequentist_interval(1.0, 0.0, 0, 0.5)


class TestEcpMonotonicity:
    def test_nested_central_intervals(self):
        # nested intervals from one predictive family: coverage is monotone
        from tarp.posterior import PredictiveT, central_interval

        rng = np.random.default_rng(1)
        pred = PredictiveT(
            df=12.0, location=rng.standard_normal(200), scale_diag=np.ones(200)
        )
        y = pred.location + rng.standard_normal(200)
        ecps = []
        for level in (0.2, 0.5, 0.8, 0.95):
            lo, hi = central_interval(pred, level)
            report = evaluate_regression(
                pred.location, np.column_stack([lo, hi]), y
            )
            ecps.append(report.ecp)
        assert all(a <= b for a, b in zip(ecps, ecps[1:]))
