"""CART decision tree classifier for route prediction."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from udnsim.ml import _tree_kernels as tk
from udnsim.ml.validation import check_feature_matrix, check_labels


class DecisionTreeRouteClassifier(BaseEstimator, ClassifierMixin):
    """Binary CART tree grown by Gini-impurity minimisation.

    max_depth=None grows until nodes are pure (or min_samples_leaf blocks
    further splits), which yields training accuracy 1.0 on any consistent
    dataset. max_depth=0 degenerates to a single majority-class leaf.
    """

    def __init__(self, max_depth=None, min_samples_leaf=1, seed=0, n_classes=3):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.seed = seed
        self.n_classes = n_classes

    def fit(self, X, y):
        X = check_feature_matrix(X)
        y = check_labels(y, len(X))
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError(f"labels must lie in [0, {self.n_classes})")
        depth = tk.NO_DEPTH_LIMIT if self.max_depth is None else np.int64(self.max_depth)
        feature, threshold, left, right, leaf, n_nodes = tk.grow_tree(
            X, y.astype(np.int8), np.arange(len(X), dtype=np.int64),
            np.int64(self.n_classes), depth, np.int64(self.min_samples_leaf),
            np.int64(X.shape[1]), np.uint64(self.seed & 0xFFFFFFFFFFFFFFFF))
        self.feature_ = feature[:n_nodes].copy()
        self.threshold_ = threshold[:n_nodes].copy()
        self.left_ = left[:n_nodes].copy()
        self.right_ = right[:n_nodes].copy()
        self.leaf_class_ = leaf[:n_nodes].copy()
        self.n_nodes_ = n_nodes
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.arange(self.n_classes, dtype=np.int64)
        return self

    def predict(self, X) -> np.ndarray:
        X = check_feature_matrix(X)
        return tk.predict_tree(self.feature_, self.threshold_, self.left_,
                               self.right_, self.leaf_class_, X).astype(np.int64)
