"""Shared fixtures: the default dataset and trained models are expensive,
so they are built once per session and reused by the unit and acceptance
tests alike."""

import numpy as np
import pytest

from udnsim.config import load_config
from udnsim.mobility import generate_dataset
from udnsim.ml import (DecisionTreeRouteClassifier, LinearSvmRouteClassifier,
                       RandomForestRouteClassifier, split_dataset)


@pytest.fixture(scope="session")
def default_config():
    return load_config()


@pytest.fixture(scope="session")
def default_dataset(default_config):
    # the whole default pipeline (data, split, models) keys off master_seed
    cfg = default_config
    return generate_dataset(
        cfg.network(), list(cfg.demands), cfg.velocity_kmh, cfg.sample_every_tics,
        cfg.master_seed, jitter_sigma_m=cfg.jitter_sigma_m, horizon_ms=cfg.horizon_ms,
        tic_ms=cfg.tic_ms, period_duration_ms=cfg.period_duration_ms)


@pytest.fixture(scope="session")
def default_split(default_dataset, default_config):
    return split_dataset(default_dataset, default_config.ml.train_fraction,
                         default_config.master_seed)


@pytest.fixture(scope="session")
def trained_svm(default_split, default_config):
    train, _ = default_split
    ml = default_config.ml
    return LinearSvmRouteClassifier(
        epochs=ml.svm_epochs, learning_rate=ml.svm_learning_rate,
        regularization=ml.svm_regularization, seed=default_config.master_seed,
    ).fit(train.features(), train.labels())


@pytest.fixture(scope="session")
def trained_dtc(default_split, default_config):
    train, _ = default_split
    ml = default_config.ml
    return DecisionTreeRouteClassifier(
        max_depth=ml.dtc_max_depth, min_samples_leaf=ml.dtc_min_samples_leaf,
        seed=default_config.master_seed,
    ).fit(train.features(), train.labels())


@pytest.fixture(scope="session")
def trained_rfc(default_split, default_config):
    train, _ = default_split
    ml = default_config.ml
    return RandomForestRouteClassifier(
        n_trees=ml.rfc_n_trees, max_depth=ml.rfc_max_depth,
        min_samples_leaf=ml.rfc_min_samples_leaf,
        feature_subsample=ml.rfc_feature_subsample, seed=default_config.master_seed,
    ).fit(train.features(), train.labels())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
