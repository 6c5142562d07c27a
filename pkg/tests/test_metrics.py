import numpy as np
import pytest

from nettwin.errors import MetricError
from nettwin.metrics import Metrics, compute_metrics


def test_perfect_prediction():
    y = np.array([1.0, 2.0, 3.0])
    m = compute_metrics(y, y)
    assert m.rmse == 0.0
    assert m.mape == 0.0
    assert m.accuracy_pct == 100.0
    assert m.r2 == 1.0


def test_hand_computed_example():
    y = np.array([1.0, 2.0, 4.0])
    p = np.array([1.1, 1.8, 4.4])
    m = compute_metrics(y, p)
    assert m.rmse == pytest.approx(np.sqrt((0.01 + 0.04 + 0.16) / 3))
    assert m.mape == pytest.approx((0.1 / 1 + 0.2 / 2 + 0.4 / 4) / 3)
    assert m.accuracy_pct == pytest.approx(100 * (1 - m.mape))
    ss_tot = np.sum((y - y.mean()) ** 2)
    assert m.r2 == pytest.approx(1 - 0.21 / ss_tot)


def test_accuracy_clipped_to_zero():
    y = np.array([1.0, 1.0])
    p = np.array([10.0, 10.0])  # MAPE 9 -> raw accuracy -800%
    assert compute_metrics(y, p).accuracy_pct == 0.0


def test_constant_truth_degenerate_r2():
    y = np.array([2.0, 2.0, 2.0])
    assert compute_metrics(y, y).r2 == 1.0
    assert compute_metrics(y, y + 0.1).r2 == 0.0


def test_non_positive_truth_names_row():
    y = np.array([1.0, -2.0, 3.0])
    with pytest.raises(MetricError, match="row 1"):
        compute_metrics(y, y)


def test_shape_validation():
    with pytest.raises(MetricError):
        compute_metrics([1.0, 2.0], [1.0])
    with pytest.raises(MetricError):
        compute_metrics([], [])


def test_json_round_trip():
    m = Metrics(rmse=0.5, mape=0.01, accuracy_pct=99.0, r2=0.98)
    assert Metrics.from_json(m.to_json()) == m
