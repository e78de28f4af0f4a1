import numpy as np
from scipy.spatial.distance import cdist

from ..exceptions import ValidationError
from ._base import BaseClassifier


class KNNClassifier(BaseClassifier):
    """Exhaustive k-nearest-neighbour vote under the Minkowski ``p`` distance.

    Neighbours at equal distance are ranked by training-row index; equal
    vote counts go to the smallest class id.

    Parameters
    ----------
    k : int, default=5
    p : float, default=1
        ``1`` is the Manhattan distance, ``2`` the Euclidean.
    chunk_size : int, default=512
        Query rows per distance block; only affects memory use.
    """

    kind = "knn"

    def __init__(self, k=5, p=1, chunk_size=512):
        self.k = k
        self.p = p
        self.chunk_size = chunk_size

    def _fit(self, X, y_idx):
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError(f"k must be a positive integer, got {self.k!r}")
        if not self.p >= 1:
            raise ValidationError(f"p must be >= 1, got {self.p!r}")
        if self.k > X.shape[0]:
            raise ValidationError(f"k={self.k} exceeds the {X.shape[0]} training rows")
        self.fit_X_ = X.copy()
        self.fit_y_ = y_idx.astype(np.int64)

    def kneighbors(self, X):
        """Indices of the ``k`` nearest training rows, nearest first."""
        X = self._check_predict(X)
        return self._kneighbors(X)

    def _distances(self, Q):
        if self.p == 1:
            return cdist(Q, self.fit_X_, metric="cityblock")
        if self.p == 2:
            return cdist(Q, self.fit_X_, metric="euclidean")
        return cdist(Q, self.fit_X_, metric="minkowski", p=self.p)

    def _kneighbors(self, X):
        k = int(self.k)
        out = np.empty((X.shape[0], k), dtype=np.int64)
        for start in range(0, X.shape[0], self.chunk_size):
            d = self._distances(X[start : start + self.chunk_size])
            out[start : start + self.chunk_size] = _k_smallest(d, k)
        return out

    def _predict_proba(self, X):
        labels = self.fit_y_[self._kneighbors(X)]
        votes = np.zeros((X.shape[0], self.n_classes_))
        for col in labels.T:
            votes[np.arange(X.shape[0]), col] += 1
        return votes / labels.shape[1]


def _k_smallest(d, k):
    """Row-wise indices of the ``k`` smallest entries ordered by (value, index).

    Same result as ``np.argsort(d, kind="stable")[:, :k]`` without sorting
    whole rows; rows with a tie straddling the k-th place use the full sort.
    """
    if k >= d.shape[1]:
        return np.argsort(d, axis=1, kind="stable")[:, :k]
    part = np.argpartition(d, k - 1, axis=1)[:, :k]
    kth = np.take_along_axis(d, part, axis=1).max(axis=1)
    part.sort(axis=1)
    vals = np.take_along_axis(d, part, axis=1)
    out = np.take_along_axis(part, np.argsort(vals, axis=1, kind="stable"), axis=1)
    tied = np.count_nonzero(d <= kth[:, None], axis=1) > k
    if tied.any():
        out[tied] = np.argsort(d[tied], axis=1, kind="stable")[:, :k]
    return out
