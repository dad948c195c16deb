"""Classifier evaluation: the five headline scores plus per-period accuracy.

tss/tess are plain accuracies on the training and testing sets. bas is the
unweighted mean of per-class recalls. rs and ps are macro-averaged recall and
precision on the test set (so rs coincides with bas by construction); the
support-weighted variants are carried alongside because the two conventions
differ noticeably on imbalanced route data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from udnsim.mobility import TrajectoryDataset

METRICS_CSV_HEADER = "model,tss,tess,bas,rs,ps,rs_weighted,ps_weighted"


def confusion_matrix(y_true, y_pred, n_classes: int = 3) -> np.ndarray:
    """(n_classes, n_classes) counts; rows are true labels, columns predicted."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    return float(np.mean(y_true == np.asarray(y_pred))) if len(y_true) else float("nan")


def per_class_recall(cm: np.ndarray) -> np.ndarray:
    """Recall per class; nan where the class has no true samples."""
    support = cm.sum(axis=1)
    return np.divide(np.diag(cm), support, out=np.full(len(cm), np.nan),
                     where=support > 0)


def per_class_precision(cm: np.ndarray) -> np.ndarray:
    """Precision per class; 0 where the class was never predicted."""
    predicted = cm.sum(axis=0)
    return np.divide(np.diag(cm), predicted, out=np.zeros(len(cm)),
                     where=predicted > 0)


def balanced_accuracy(y_true, y_pred, n_classes: int = 3) -> float:
    """Unweighted mean of per-class recalls over classes present in y_true."""
    recalls = per_class_recall(confusion_matrix(y_true, y_pred, n_classes))
    return float(np.nanmean(recalls))


@dataclass(frozen=True)
class ClassifierMetrics:
    tss: float
    tess: float
    bas: float
    rs: float
    ps: float
    rs_weighted: float
    ps_weighted: float

    def csv_row(self, model_name: str) -> str:
        return (f"{model_name},{self.tss!r},{self.tess!r},{self.bas!r},"
                f"{self.rs!r},{self.ps!r},{self.rs_weighted!r},{self.ps_weighted!r}")


def evaluate(model, train: TrajectoryDataset, test: TrajectoryDataset,
             n_classes: int = 3) -> ClassifierMetrics:
    """Score a fitted model on a train/test pair."""
    if train.n_rows == 0 or test.n_rows == 0:
        raise ValueError("train and test sets must be nonempty")
    train_pred = model.predict(train.features())
    test_pred = model.predict(test.features())
    y = test.labels()
    cm = confusion_matrix(y, test_pred, n_classes)
    recalls = per_class_recall(cm)
    precisions = per_class_precision(cm)
    support = cm.sum(axis=1)
    present = support > 0
    weights = support[present] / support[present].sum()
    return ClassifierMetrics(
        tss=accuracy(train.labels(), train_pred),
        tess=accuracy(y, test_pred),
        bas=float(np.mean(recalls[present])),
        rs=float(np.mean(recalls[present])),
        ps=float(np.mean(precisions[present])),
        rs_weighted=float(np.sum(weights * recalls[present])),
        ps_weighted=float(np.sum(weights * precisions[present])),
    )


def per_period_accuracy(model, test: TrajectoryDataset) -> dict:
    """Per time period: recall of that period's dominant route.

    Keys are (period_index, dominant_route_id); periods absent from the test
    set are simply absent from the result.
    """
    pred = model.predict(test.features())
    y = test.labels()
    out = {}
    for p in sorted(set(test.period.tolist())):
        mask = test.period == p
        labels, counts = np.unique(y[mask], return_counts=True)
        dominant = int(labels[np.argmax(counts)])
        dom_mask = mask & (y == dominant)
        out[(int(p), dominant)] = float(np.mean(pred[dom_mask] == dominant))
    return out
