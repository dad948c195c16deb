import numpy as np
import pytest

from udnsim.ml import (DecisionTreeRouteClassifier, LinearSvmRouteClassifier,
                       RandomForestRouteClassifier, load_model, save_model)
from udnsim.ml.oracle import OracleRoutePredictor
from udnsim.ml.serialization import model_from_dict, model_to_dict


@pytest.fixture(scope="module")
def toy(rng=None):
    r = np.random.default_rng(5)
    X = r.normal(size=(300, 4))
    y = (X[:, 0] > 0).astype(np.int64) + (X[:, 1] > 0.5).astype(np.int64)
    return X, y


@pytest.mark.parametrize("factory", [
    lambda: LinearSvmRouteClassifier(seed=2, epochs=6),
    lambda: DecisionTreeRouteClassifier(seed=2, max_depth=6),
    lambda: RandomForestRouteClassifier(seed=2, n_trees=4, max_depth=6),
])
def test_roundtrip_preserves_predictions(factory, toy, tmp_path):
    X, y = toy
    model = factory().fit(X, y)
    path = tmp_path / "model.json"
    save_model(model, path)
    clone = load_model(path)
    probe = np.random.default_rng(9).normal(size=(200, 4))
    assert np.array_equal(model.predict(probe), clone.predict(probe))


def test_model_files_byte_identical_per_seed(toy, tmp_path):
    X, y = toy
    paths = []
    for run in range(2):
        model = RandomForestRouteClassifier(seed=3, n_trees=3).fit(X, y)
        p = tmp_path / f"m{run}.json"
        save_model(model, p)
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]


def test_oracle_roundtrip(tmp_path):
    path = tmp_path / "oracle.json"
    save_model(OracleRoutePredictor(), path)
    model = load_model(path)
    assert isinstance(model, OracleRoutePredictor)
    assert np.array_equal(model.predict(None, true_routes=[1, 2]), [1, 2])
    with pytest.raises(ValueError):
        model.predict(np.zeros((1, 4)))


def test_rejects_unknown_format():
    with pytest.raises(ValueError):
        model_from_dict({"format": "other/9", "kind": "svm"})


def test_dict_is_versioned(toy):
    X, y = toy
    d = model_to_dict(DecisionTreeRouteClassifier(max_depth=2).fit(X, y))
    assert d["format"] == "udnsim-model/1"
    assert d["kind"] == "dtc"
