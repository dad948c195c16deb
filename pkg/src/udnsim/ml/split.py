"""Random train/test partitioning of trajectory datasets."""

from __future__ import annotations

import numpy as np

from udnsim.mobility import TrajectoryDataset


def split_dataset(dataset: TrajectoryDataset, train_fraction: float, seed: int):
    """Disjoint (train, test) split with |train| = round(train_fraction * N)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = dataset.n_rows
    if n == 0:
        raise ValueError("cannot split an empty dataset")
    n_train = int(np.rint(train_fraction * n))
    perm = np.random.default_rng(seed).permutation(n)
    return dataset.subset(perm[:n_train]), dataset.subset(perm[n_train:])
