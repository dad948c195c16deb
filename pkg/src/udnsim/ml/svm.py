"""Linear one-vs-rest SVM trained by stochastic subgradient descent."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from udnsim.ml.validation import check_feature_matrix, check_labels

_BATCH = 64


class LinearSvmRouteClassifier(BaseEstimator, ClassifierMixin):
    """One-vs-rest linear SVM: hinge loss with L2 regularisation.

    Features are standardised internally (the scaler is part of the fitted
    model). Minibatch subgradient steps use the decaying rate
    lr / (1 + lr * regularization * t). Prediction is the argmax of the class
    scores; exact ties resolve to the lowest class id.
    """

    def __init__(self, epochs=40, learning_rate=0.5, regularization=1e-4,
                 seed=0, classes=(0, 1, 2)):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.regularization = regularization
        self.seed = seed
        self.classes = classes

    def fit(self, X, y):
        X = check_feature_matrix(X)
        y = check_labels(y, len(X))
        classes = np.asarray(self.classes, dtype=np.int64)
        present = set(np.unique(y).tolist())
        for c in classes:
            if int(c) not in present:
                raise ValueError(f"class {c} absent from training data")
        if set(map(int, y)) - set(map(int, classes)):
            raise ValueError("training labels outside the configured classes")

        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0.0] = 1.0
        Xs = (X - mean) / std
        n, f = Xs.shape
        k = len(classes)
        target = np.where(y[:, None] == classes[None, :], 1.0, -1.0)

        rng = np.random.default_rng(self.seed)
        W = np.zeros((k, f))
        b = np.zeros(k)
        lr = self.learning_rate
        reg = self.regularization
        t = 0
        for _ in range(self.epochs):
            perm = rng.permutation(n)
            for lo in range(0, n, _BATCH):
                batch = perm[lo:lo + _BATCH]
                Xb = Xs[batch]
                Yb = target[batch]
                eta = lr / (1.0 + lr * reg * t)
                t += 1
                scores = Xb @ W.T + b
                viol = (Yb * scores) < 1.0
                coef = Yb * viol
                grad_w = reg * W - (coef.T @ Xb) / len(batch)
                grad_b = -coef.mean(axis=0)
                W -= eta * grad_w
                b -= eta * grad_b

        self.classes_ = classes
        self.mean_ = mean
        self.std_ = std
        self.coef_ = W
        self.intercept_ = b
        self.n_features_in_ = f
        return self

    def decision_function(self, X) -> np.ndarray:
        X = check_feature_matrix(X)
        Xs = (X - self.mean_) / self.std_
        return Xs @ self.coef_.T + self.intercept_

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]
