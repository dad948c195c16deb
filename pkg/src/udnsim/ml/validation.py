"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np


def check_feature_matrix(X) -> np.ndarray:
    """Coerce to a C-contiguous (n, f) float64 matrix of finite values."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2D feature matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite values")
    return X


def check_labels(y, n_rows: int) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.int64)
    if y.ndim != 1 or len(y) != n_rows:
        raise ValueError(f"labels must be 1D with {n_rows} entries, got shape {y.shape}")
    if len(y) == 0:
        raise ValueError("empty training set")
    return y


def check_classes_present(y: np.ndarray, classes) -> None:
    present = set(np.unique(y).tolist())
    for c in classes:
        if c not in present:
            raise ValueError(f"class {c} absent from training data")
