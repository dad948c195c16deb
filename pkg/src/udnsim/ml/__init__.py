"""Route classifiers, dataset splitting, and evaluation metrics.

Estimators follow the scikit-learn fit/predict/get_params convention so they
compose with the wider ecosystem, but the training algorithms (hinge-loss
SGD, CART, bagged forest) are implemented here.
"""

import numpy as np

from udnsim.ml.forest import RandomForestRouteClassifier
from udnsim.ml.metrics import (ClassifierMetrics, confusion_matrix, evaluate,
                               per_period_accuracy)
from udnsim.ml.oracle import OracleRoutePredictor
from udnsim.ml.serialization import load_model, model_to_dict, save_model
from udnsim.ml.split import split_dataset
from udnsim.ml.svm import LinearSvmRouteClassifier
from udnsim.ml.tree import DecisionTreeRouteClassifier

MODEL_KINDS = ("svm", "dtc", "rfc")


def make_classifier(kind: str, seed: int = 0, **hyper):
    """Instantiate a route classifier by kind name (svm, dtc, rfc)."""
    if kind == "svm":
        return LinearSvmRouteClassifier(seed=seed, **hyper)
    if kind == "dtc":
        return DecisionTreeRouteClassifier(seed=seed, **hyper)
    if kind == "rfc":
        return RandomForestRouteClassifier(seed=seed, **hyper)
    raise ValueError(f"unknown classifier kind {kind!r}")


def predict_route(model, x: float, y: float, period: int, t_ms: float) -> int:
    """Predict the route id for a single (x, y, period, t_ms) query."""
    features = np.array([[x, y, float(period), t_ms]], dtype=np.float64)
    return int(model.predict(features)[0])


__all__ = [
    "ClassifierMetrics",
    "DecisionTreeRouteClassifier",
    "LinearSvmRouteClassifier",
    "MODEL_KINDS",
    "OracleRoutePredictor",
    "RandomForestRouteClassifier",
    "confusion_matrix",
    "evaluate",
    "load_model",
    "make_classifier",
    "model_to_dict",
    "per_period_accuracy",
    "predict_route",
    "save_model",
    "split_dataset",
]
