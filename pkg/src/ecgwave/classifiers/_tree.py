"""Array-backed binary trees and the greedy CART grower shared by the tree learners.

The grower is criterion-agnostic: every sample carries a row of additive
statistics (weighted class counts for classification, ``[weight,
weight * target]`` for regression) and a ``score(left, right)`` function
rates candidate splits from cumulative sums of those rows. Higher is better.

Candidate thresholds are midpoints between consecutive distinct sorted
values; a sample goes left when ``x <= threshold``. Ties between equally
scored splits resolve to the lowest feature index, then the lowest
threshold, and nodes are numbered in depth-first pre-order.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(eq=False)
class Tree:
    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # (n_nodes, n_outputs)

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    @property
    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):  # parents precede children in pre-order
            if self.feature[node] >= 0:
                depth[self.left[node]] = depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def apply(self, X):
        """Leaf index reached by every row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node[rows]]
            rows = rows[feat >= 0]
            if rows.size == 0:
                return node
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])

    def predict_value(self, X):
        return self.value[self.apply(X)]

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64).reshape(len(d["feature"]), -1),
        )


def gini_score(left, right):
    """Negated weighted Gini impurity, up to a per-node constant."""
    return (left**2).sum(axis=-1) / left.sum(axis=-1) + (right**2).sum(axis=-1) / right.sum(axis=-1)


def mse_score(left, right):
    """Variance reduction for stats rows ``[w, w * target]``, up to a per-node constant."""
    return left[..., 1] ** 2 / left[..., 0] + right[..., 1] ** 2 / right[..., 0]


def best_split(Xn, Sn, score):
    """Best ``(feature_position, threshold)`` for one node, or ``None``."""
    order = np.argsort(Xn, axis=0, kind="stable")
    return _best_sorted_split(np.take_along_axis(Xn, order, axis=0), Sn[order], score)


def _best_sorted_split(xs, ss, score):
    """Split search on per-feature sorted values ``xs`` (m, f) and stats ``ss`` (m, f, c)."""
    m = xs.shape[0]
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None
    cum = np.cumsum(ss, axis=0)
    left = cum[:-1]
    right = cum[-1] - left
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = score(left, right)
    scores = np.where(valid, scores, -np.inf)
    feat, pos = divmod(int(np.argmax(scores.T)), m - 1)
    if not np.isfinite(scores[pos, feat]):
        return None
    lo, hi = xs[pos, feat], xs[pos + 1, feat]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return feat, thr


def presort(X):
    """Stable per-column ordering of ``X``, reusable across trees grown on all of ``X``."""
    return np.argsort(X, axis=0, kind="stable")


def _node_split(X, stats, idx, feats, score, presorted):
    n = X.shape[0]
    # Filtering the global order costs O(n) per feature, a fresh sort
    # O(m log m); the filter wins for large nodes. Both give the same
    # order because idx is ascending.
    if presorted is not None and idx.size * 16 > n:
        mask = np.zeros(n, dtype=bool)
        mask[idx] = True
        cols = presorted[:, feats].T
        order = cols[mask[cols]].reshape(feats.size, idx.size).T
        xs = np.take_along_axis(X[:, feats], order, axis=0)
        return _best_sorted_split(xs, stats[order], score)
    return best_split(X[np.ix_(idx, feats)], stats[idx], score)


def grow_tree(X, stats, score, leaf_value, is_pure, max_depth=None, max_features=None, rng=None,
              presorted=None):
    """Grow one tree greedily.

    Parameters
    ----------
    X : ndarray of shape (n_samples, n_features)
    stats : ndarray of shape (n_samples, n_stats)
        Additive per-sample statistics consumed by ``score``.
    score : callable
        ``score(left, right) -> ndarray``, larger is better.
    leaf_value : callable
        Maps the sample indices of a node to its stored value vector.
    is_pure : callable
        Maps node sample indices to True when the node must not be split.
    max_depth : int or None
    max_features : int or None
        Number of candidate features drawn (without replacement) per node.
    rng : numpy.random.Generator
        Required when ``max_features`` is smaller than ``n_features``.
    presorted : ndarray, optional
        ``presort(X)``; speeds up large nodes without changing the result.
    """
    n, n_feat = X.shape
    if max_depth is None:
        max_depth = np.inf
    subsample = max_features is not None and max_features < n_feat

    feature, threshold, left, right, value = [], [], [], [], []
    stack = [(np.arange(n), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(np.asarray(leaf_value(idx), dtype=np.float64))

        if depth >= max_depth or idx.size < 2 or is_pure(idx):
            continue
        if subsample:
            feats = np.sort(rng.choice(n_feat, size=max_features, replace=False))
        else:
            feats = np.arange(n_feat)
        split = _node_split(X, stats, idx, feats, score, presorted)
        if split is None:
            continue
        f, thr = int(feats[split[0]]), float(split[1])
        go_left = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        stack.append((idx[~go_left], depth + 1, node, False))
        stack.append((idx[go_left], depth + 1, node, True))

    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.vstack(value),
    )


def grow_classification_tree(X, y, n_classes, sample_weight=None, max_depth=None,
                             max_features=None, rng=None, presorted=None):
    """CART on Gini impurity; leaf values are normalized class distributions."""
    w = np.ones(X.shape[0]) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    stats = np.zeros((X.shape[0], n_classes))
    stats[np.arange(X.shape[0]), y] = w

    def leaf_value(idx):
        counts = stats[idx].sum(axis=0)
        return counts / counts.sum()

    def is_pure(idx):
        return np.count_nonzero(stats[idx].sum(axis=0)) <= 1

    return grow_tree(X, stats, gini_score, leaf_value, is_pure, max_depth, max_features, rng,
                     presorted)
