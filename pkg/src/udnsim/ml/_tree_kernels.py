"""Compiled CART primitives shared by the single tree and the forest.

Trees are grown greedily by Gini-impurity minimisation over axis-aligned
midpoint thresholds and stored as flat arrays (feature, threshold, left,
right, leaf_class). All randomness (bootstrap rows, per-split feature
subsets) comes from an inline splitmix64 stream so growth is deterministic
for a fixed seed. Tie-breaking is fixed everywhere: among equal-gain splits
the lowest feature index and then the lowest threshold wins; leaf majorities
and vote ties resolve to the lowest class id.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

LEAF = np.int8(-1)
NO_DEPTH_LIMIT = np.int64(2**31)


@njit(cache=True, inline="always")
def _next_u64(state: np.uint64) -> np.uint64:
    """Advance the splitmix64 counter; _mix_out turns it into an output."""
    return state + np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True, inline="always")
def _mix_out(state: np.uint64) -> np.uint64:
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def grow_tree(X, y, sample_idx, n_classes, max_depth, min_samples_leaf,
              max_features, seed):
    """Grow one CART tree on X[sample_idx], y[sample_idx].

    Returns (feature, threshold, left, right, leaf_class, n_nodes); rows
    beyond n_nodes are unused capacity. feature == -1 marks a leaf.
    """
    n = sample_idx.shape[0]
    n_features = X.shape[1]
    cap = 2 * n + 1
    out_feature = np.full(cap, LEAF, dtype=np.int8)
    out_threshold = np.zeros(cap, dtype=np.float64)
    out_left = np.full(cap, -1, dtype=np.int32)
    out_right = np.full(cap, -1, dtype=np.int32)
    out_leaf = np.zeros(cap, dtype=np.int8)

    indices = sample_idx.copy()
    scratch = np.empty(n, dtype=np.int64)
    feat_pool = np.empty(n_features, dtype=np.int64)
    counts = np.zeros(n_classes, dtype=np.int64)
    left_counts = np.zeros(n_classes, dtype=np.int64)

    # stack of pending nodes: (start, end, depth, node_id)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    stack_depth = np.empty(cap, dtype=np.int64)
    stack_node = np.empty(cap, dtype=np.int64)

    rng = np.uint64(seed)
    n_nodes = 1
    top = 0
    stack_start[0] = 0
    stack_end[0] = n
    stack_depth[0] = 0
    stack_node[0] = 0
    top = 1

    while top > 0:
        top -= 1
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        node = stack_node[top]
        m = end - start

        counts[:] = 0
        for i in range(start, end):
            counts[y[indices[i]]] += 1
        majority = 0
        best_count = counts[0]
        for c in range(1, n_classes):
            if counts[c] > best_count:
                best_count = counts[c]
                majority = c

        is_leaf = (best_count == m) or (depth >= max_depth) or (m < 2 * min_samples_leaf)

        best_feature = -1
        best_threshold = 0.0
        best_score = -1.0   # maximise sum(counts^2/n) over the two children

        if not is_leaf:
            # choose the candidate features for this split
            if max_features >= n_features:
                n_cand = n_features
                for f in range(n_features):
                    feat_pool[f] = f
            else:
                for f in range(n_features):
                    feat_pool[f] = f
                for k in range(max_features):   # partial Fisher-Yates
                    rng = _next_u64(rng)
                    j = k + np.int64(_mix_out(rng) % np.uint64(n_features - k))
                    tmp = feat_pool[k]
                    feat_pool[k] = feat_pool[j]
                    feat_pool[j] = tmp
                n_cand = max_features
                # ascending order keeps the lowest-feature tie-break
                for a in range(1, n_cand):
                    key = feat_pool[a]
                    b = a - 1
                    while b >= 0 and feat_pool[b] > key:
                        feat_pool[b + 1] = feat_pool[b]
                        b -= 1
                    feat_pool[b + 1] = key

            vals = np.empty(m, dtype=np.float64)
            for fi in range(n_cand):
                feat = feat_pool[fi]
                for i in range(m):
                    vals[i] = X[indices[start + i], feat]
                order = np.argsort(vals, kind="mergesort")
                left_counts[:] = 0
                n_left = 0
                for oi in range(m - 1):
                    row = indices[start + order[oi]]
                    left_counts[y[row]] += 1
                    n_left += 1
                    v = vals[order[oi]]
                    v_next = vals[order[oi + 1]]
                    if v == v_next:
                        continue
                    n_right = m - n_left
                    if n_left < min_samples_leaf or n_right < min_samples_leaf:
                        continue
                    sl = 0.0
                    sr = 0.0
                    for c in range(n_classes):
                        cl = left_counts[c]
                        cr = counts[c] - cl
                        sl += cl * cl
                        sr += cr * cr
                    score = sl / n_left + sr / n_right
                    if score > best_score:
                        best_score = score
                        best_feature = feat
                        best_threshold = 0.5 * (v + v_next)
            if best_feature < 0:
                is_leaf = True

        if is_leaf:
            out_feature[node] = LEAF
            out_leaf[node] = np.int8(majority)
            continue

        # stable partition: rows with value <= threshold keep their order on the left
        n_left = 0
        for i in range(start, end):
            if X[indices[i], best_feature] <= best_threshold:
                scratch[n_left] = indices[i]
                n_left += 1
        n_right = 0
        for i in range(start, end):
            if not (X[indices[i], best_feature] <= best_threshold):
                scratch[n_left + n_right] = indices[i]
                n_right += 1
        for i in range(m):
            indices[start + i] = scratch[i]

        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        out_feature[node] = np.int8(best_feature)
        out_threshold[node] = best_threshold
        out_left[node] = left_id
        out_right[node] = right_id

        stack_start[top] = start
        stack_end[top] = start + n_left
        stack_depth[top] = depth + 1
        stack_node[top] = left_id
        top += 1
        stack_start[top] = start + n_left
        stack_end[top] = end
        stack_depth[top] = depth + 1
        stack_node[top] = right_id
        top += 1

    return out_feature, out_threshold, out_left, out_right, out_leaf, n_nodes


@njit(cache=True)
def bootstrap_indices(n: int, seed: np.uint64) -> np.ndarray:
    """n draws with replacement from [0, n), deterministic for the seed."""
    rng = np.uint64(seed)
    idx = np.empty(n, dtype=np.int64)
    for i in range(n):
        rng = _next_u64(rng)
        idx[i] = np.int64(_mix_out(rng) % np.uint64(n))
    return idx


@njit(cache=True, nogil=True)
def predict_tree(feature, threshold, left, right, leaf_class, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int8)
    for i in range(n):
        node = 0
        while feature[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_class[node]
    return out


@njit(cache=True, nogil=True, parallel=True)
def vote_forest(features, thresholds, lefts, rights, leaves, offsets, X, n_classes):
    """Majority vote over trees stored back-to-back in flat arrays.

    offsets[t] is the root index of tree t; ties go to the lowest class id.
    Returns (votes, predictions) so callers can audit the tally. Rows are
    independent, so the parallel loop cannot change the result.
    """
    n = X.shape[0]
    n_trees = offsets.shape[0]
    votes = np.zeros((n, n_classes), dtype=np.int32)
    out = np.empty(n, dtype=np.int8)
    for i in prange(n):
        for t in range(n_trees):
            base = offsets[t]
            node = base
            while features[node] != LEAF:
                if X[i, features[node]] <= thresholds[node]:
                    node = base + lefts[node]
                else:
                    node = base + rights[node]
            votes[i, leaves[node]] += 1
        best = 0
        for c in range(1, n_classes):
            if votes[i, c] > votes[i, best]:
                best = c
        out[i] = np.int8(best)
    return votes, out
