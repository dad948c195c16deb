"""Versioned JSON persistence for trained route classifiers.

The format is self-describing text (field names plus numbers) so a model file
is diffable and a fixed seed reproduces it byte for byte.
"""

from __future__ import annotations

import json

import numpy as np

FORMAT = "udnsim-model/1"


def model_to_dict(model) -> dict:
    from udnsim.ml.forest import RandomForestRouteClassifier
    from udnsim.ml.oracle import OracleRoutePredictor
    from udnsim.ml.svm import LinearSvmRouteClassifier
    from udnsim.ml.tree import DecisionTreeRouteClassifier

    if isinstance(model, LinearSvmRouteClassifier):
        return {
            "format": FORMAT,
            "kind": "svm",
            "params": {"epochs": model.epochs, "learning_rate": model.learning_rate,
                       "regularization": model.regularization, "seed": model.seed,
                       "classes": list(map(int, model.classes))},
            "mean": model.mean_.tolist(),
            "std": model.std_.tolist(),
            "coef": model.coef_.tolist(),
            "intercept": model.intercept_.tolist(),
        }
    if isinstance(model, DecisionTreeRouteClassifier):
        return {
            "format": FORMAT,
            "kind": "dtc",
            "params": {"max_depth": model.max_depth,
                       "min_samples_leaf": model.min_samples_leaf,
                       "seed": model.seed, "n_classes": model.n_classes},
            "tree": _tree_to_dict(model.feature_, model.threshold_, model.left_,
                                  model.right_, model.leaf_class_),
        }
    if isinstance(model, RandomForestRouteClassifier):
        return {
            "format": FORMAT,
            "kind": "rfc",
            "params": {"n_trees": model.n_trees, "max_depth": model.max_depth,
                       "min_samples_leaf": model.min_samples_leaf,
                       "feature_subsample": model.feature_subsample,
                       "bootstrap": model.bootstrap,
                       "seed": model.seed, "n_classes": model.n_classes},
            "trees": [_tree_to_dict(*arrays) for arrays in model.tree_arrays_],
        }
    if isinstance(model, OracleRoutePredictor):
        return {"format": FORMAT, "kind": "oracle", "params": {}}
    raise TypeError(f"cannot serialise {type(model).__name__}")


def _tree_to_dict(feature, threshold, left, right, leaf_class) -> dict:
    return {
        "feature": feature.tolist(),
        "threshold": threshold.tolist(),
        "left": left.tolist(),
        "right": right.tolist(),
        "leaf_class": leaf_class.tolist(),
    }


def _tree_from_dict(d) -> tuple:
    return (np.asarray(d["feature"], dtype=np.int8),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int32),
            np.asarray(d["right"], dtype=np.int32),
            np.asarray(d["leaf_class"], dtype=np.int8))


def model_from_dict(d: dict):
    from udnsim.ml.forest import RandomForestRouteClassifier
    from udnsim.ml.oracle import OracleRoutePredictor
    from udnsim.ml.svm import LinearSvmRouteClassifier
    from udnsim.ml.tree import DecisionTreeRouteClassifier

    if d.get("format") != FORMAT:
        raise ValueError(f"unsupported model format {d.get('format')!r}")
    kind = d["kind"]
    params = d.get("params", {})
    if kind == "svm":
        model = LinearSvmRouteClassifier(
            epochs=params["epochs"], learning_rate=params["learning_rate"],
            regularization=params["regularization"], seed=params["seed"],
            classes=tuple(params["classes"]))
        model.classes_ = np.asarray(params["classes"], dtype=np.int64)
        model.mean_ = np.asarray(d["mean"], dtype=np.float64)
        model.std_ = np.asarray(d["std"], dtype=np.float64)
        model.coef_ = np.asarray(d["coef"], dtype=np.float64)
        model.intercept_ = np.asarray(d["intercept"], dtype=np.float64)
        model.n_features_in_ = model.coef_.shape[1]
        return model
    if kind == "dtc":
        model = DecisionTreeRouteClassifier(**params)
        (model.feature_, model.threshold_, model.left_, model.right_,
         model.leaf_class_) = _tree_from_dict(d["tree"])
        model.n_nodes_ = len(model.feature_)
        model.classes_ = np.arange(model.n_classes, dtype=np.int64)
        return model
    if kind == "rfc":
        model = RandomForestRouteClassifier(**params)
        trees = [_tree_from_dict(t) for t in d["trees"]]
        model.tree_arrays_ = trees
        model.offsets_ = np.cumsum([0] + [len(t[0]) for t in trees[:-1]]).astype(np.int64)
        model.features_flat_ = np.concatenate([t[0] for t in trees])
        model.thresholds_flat_ = np.concatenate([t[1] for t in trees])
        model.lefts_flat_ = np.concatenate([t[2] for t in trees])
        model.rights_flat_ = np.concatenate([t[3] for t in trees])
        model.leaves_flat_ = np.concatenate([t[4] for t in trees])
        model.classes_ = np.arange(model.n_classes, dtype=np.int64)
        return model
    if kind == "oracle":
        return OracleRoutePredictor()
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
