"""Bagged forest of CART trees with per-split feature subsampling."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from udnsim.ml import _tree_kernels as tk
from udnsim.ml.validation import check_feature_matrix, check_labels


class RandomForestRouteClassifier(BaseEstimator, ClassifierMixin):
    """Majority vote over n_trees CART trees.

    Each tree trains on a bootstrap resample (same size, with replacement)
    and considers a random feature subset at every split. Tree t's randomness
    derives from seed XOR t, so results do not depend on how many worker
    threads grow the trees. feature_subsample="sqrt" uses round(sqrt(f));
    None disables subsampling. bootstrap=False plus feature_subsample=None
    and n_trees=1 reproduces the plain decision tree exactly.
    """

    def __init__(self, n_trees=100, max_depth=None, min_samples_leaf=1,
                 feature_subsample="sqrt", bootstrap=True, seed=0, n_classes=3,
                 n_jobs=None):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.feature_subsample = feature_subsample
        self.bootstrap = bootstrap
        self.seed = seed
        self.n_classes = n_classes
        self.n_jobs = n_jobs

    def _max_features(self, n_features: int) -> int:
        if self.feature_subsample is None:
            return n_features
        if self.feature_subsample == "sqrt":
            return max(1, round(math.sqrt(n_features)))
        return int(self.feature_subsample)

    def fit(self, X, y):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        X = check_feature_matrix(X)
        y = check_labels(y, len(X)).astype(np.int8)
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError(f"labels must lie in [0, {self.n_classes})")
        n = len(X)
        depth = tk.NO_DEPTH_LIMIT if self.max_depth is None else np.int64(self.max_depth)
        max_features = np.int64(self._max_features(X.shape[1]))
        base_idx = np.arange(n, dtype=np.int64)

        def grow_one(t: int):
            tree_seed = np.uint64((self.seed ^ t) & 0xFFFFFFFFFFFFFFFF)
            idx = tk.bootstrap_indices(n, tree_seed) if self.bootstrap else base_idx
            feature, threshold, left, right, leaf, n_nodes = tk.grow_tree(
                X, y, idx, np.int64(self.n_classes), depth,
                np.int64(self.min_samples_leaf), max_features, tree_seed)
            return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
                    left[:n_nodes].copy(), right[:n_nodes].copy(),
                    leaf[:n_nodes].copy())

        workers = self.n_jobs or min(4, os.cpu_count() or 1)
        if workers > 1 and self.n_trees > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                trees = list(pool.map(grow_one, range(self.n_trees)))
        else:
            trees = [grow_one(t) for t in range(self.n_trees)]

        self.tree_arrays_ = trees
        self.offsets_ = np.cumsum([0] + [len(t[0]) for t in trees[:-1]]).astype(np.int64)
        self.features_flat_ = np.concatenate([t[0] for t in trees])
        self.thresholds_flat_ = np.concatenate([t[1] for t in trees])
        self.lefts_flat_ = np.concatenate([t[2] for t in trees])
        self.rights_flat_ = np.concatenate([t[3] for t in trees])
        self.leaves_flat_ = np.concatenate([t[4] for t in trees])
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.arange(self.n_classes, dtype=np.int64)
        return self

    def predict(self, X) -> np.ndarray:
        _, pred = self.vote(X)
        return pred.astype(np.int64)

    def vote(self, X):
        """(votes, predictions): per-class tree tallies alongside the argmax."""
        X = check_feature_matrix(X)
        return tk.vote_forest(self.features_flat_, self.thresholds_flat_,
                              self.lefts_flat_, self.rights_flat_,
                              self.leaves_flat_, self.offsets_, X,
                              np.int64(self.n_classes))

    def tree_predictions(self, X) -> np.ndarray:
        """(n_trees, n_rows) individual tree outputs, for vote audits."""
        X = check_feature_matrix(X)
        return np.stack([
            tk.predict_tree(f, th, le, ri, lf, X)
            for f, th, le, ri, lf in self.tree_arrays_
        ])
