import numpy as np
import pytest
from sklearn.metrics import (balanced_accuracy_score, precision_score,
                             recall_score)

from udnsim.mobility import TrajectoryDataset
from udnsim.ml import evaluate, per_period_accuracy, predict_route
from udnsim.ml.metrics import (balanced_accuracy, confusion_matrix,
                               per_class_recall)


class StubModel:
    """Predicts a fixed mapping from the x feature (used as a row id)."""

    def __init__(self, mapping):
        self.mapping = mapping

    def predict(self, X):
        return self.mapping[X[:, 0].astype(np.int64)]


def _dataset(labels, periods=None):
    n = len(labels)
    return TrajectoryDataset(
        x=np.arange(n, dtype=np.float64),
        y=np.zeros(n),
        period=np.asarray(periods if periods is not None else np.zeros(n), dtype=np.int64),
        t_ms=np.zeros(n),
        route=np.asarray(labels, dtype=np.int64),
    )


def test_perfect_predictor_scores_one():
    labels = np.array([0, 1, 2, 0, 1, 2, 1, 1, 2])
    ds = _dataset(labels)
    model = StubModel(labels.copy())
    m = evaluate(model, ds, ds)
    assert (m.tss, m.tess, m.bas, m.rs, m.ps) == (1.0, 1.0, 1.0, 1.0, 1.0)
    assert m.rs_weighted == 1.0 and m.ps_weighted == 1.0


def test_constant_predictor_on_balanced_set():
    labels = np.array([0, 1, 2] * 10)
    ds = _dataset(labels)
    model = StubModel(np.zeros(30, dtype=np.int64))
    m = evaluate(model, ds, ds)
    assert m.tess == pytest.approx(1 / 3)
    assert m.bas == pytest.approx(1 / 3)
    assert m.rs == m.bas   # macro recall is the same construction


def test_metrics_match_sklearn_oracle(rng):
    y_true = rng.integers(0, 3, size=500)
    y_pred = np.where(rng.random(500) < 0.3, rng.integers(0, 3, size=500), y_true)
    ds = _dataset(y_true)
    m = evaluate(StubModel(y_pred), ds, ds)
    assert m.bas == pytest.approx(balanced_accuracy_score(y_true, y_pred), abs=1e-12)
    assert m.rs == pytest.approx(
        recall_score(y_true, y_pred, average="macro"), abs=1e-12)
    assert m.ps == pytest.approx(
        precision_score(y_true, y_pred, average="macro", zero_division=0), abs=1e-12)
    assert m.rs_weighted == pytest.approx(
        recall_score(y_true, y_pred, average="weighted"), abs=1e-12)
    assert m.ps_weighted == pytest.approx(
        precision_score(y_true, y_pred, average="weighted", zero_division=0), abs=1e-12)


def test_bas_two_code_paths_agree(rng):
    y_true = rng.integers(0, 3, size=400)
    y_pred = rng.integers(0, 3, size=400)
    via_cm = float(np.nanmean(per_class_recall(confusion_matrix(y_true, y_pred, 3))))
    direct = balanced_accuracy(y_true, y_pred, 3)
    assert via_cm == pytest.approx(direct, abs=1e-15)


def test_per_period_accuracy_dominant_recall():
    periods = np.array([0] * 10 + [1] * 10)
    labels = np.array([0] * 7 + [1] * 3 + [1] * 8 + [2] * 2)
    pred = labels.copy()
    pred[0] = 2          # one dominant-route miss in period 0
    ds = _dataset(labels, periods)
    out = per_period_accuracy(StubModel(pred), ds)
    assert set(out) == {(0, 0), (1, 1)}
    assert out[(0, 0)] == pytest.approx(6 / 7)
    assert out[(1, 1)] == 1.0


def test_per_period_missing_period_is_absent():
    ds = _dataset(np.array([0, 0, 1]), periods=np.array([2, 2, 2]))
    out = per_period_accuracy(StubModel(np.array([0, 0, 1])), ds)
    assert set(out) == {(2, 0)}


def test_overall_recall_bracketed_by_per_period_recalls(trained_rfc, default_split):
    # overall class recall is a support-weighted mean of its per-period recalls
    _, test = default_split
    pred = trained_rfc.predict(test.features())
    y = test.labels()
    for route in (0, 1, 2):
        per_period = []
        for p in np.unique(test.period):
            mask = (test.period == p) & (y == route)
            if mask.any():
                per_period.append(np.mean(pred[mask] == route))
        overall = np.mean(pred[y == route] == route)
        assert min(per_period) - 1e-9 <= overall <= max(per_period) + 1e-9


def test_predict_route_scalar(trained_dtc):
    route = predict_route(trained_dtc, 600.0, 800.0, 1, 50_000.0)
    assert route in (0, 1, 2)
    again = predict_route(trained_dtc, 600.0, 800.0, 1, 50_000.0)
    assert route == again
