from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from labelguard.classifiers.base import AlgorithmKind, Classifier

_CHUNK = 1024


def _nearest(d: np.ndarray, k: int) -> np.ndarray:
    """Columns of the k smallest entries per row, ordered by (distance, column)."""
    if k >= d.shape[1]:
        return np.argsort(d, axis=1, kind="stable")
    part = np.argpartition(d, k - 1, axis=1)[:, :k]
    kth = np.take_along_axis(d, part, axis=1).max(axis=1)
    out = np.empty((len(d), k), dtype=np.int64)
    # rows with ties straddling the k-th distance need a full stable sort
    crowded = np.count_nonzero(d <= kth[:, None], axis=1) > k
    for r in np.flatnonzero(crowded):
        out[r] = np.argsort(d[r], kind="stable")[:k]
    calm = np.flatnonzero(~crowded)
    if len(calm):
        cols = np.sort(part[calm], axis=1)
        vals = np.take_along_axis(d[calm], cols, axis=1)
        order = np.argsort(vals, axis=1, kind="stable")
        out[calm] = np.take_along_axis(cols, order, axis=1)
    return out


class KNNClassifier(Classifier):
    """Majority vote of the ``k`` nearest training points (Euclidean).

    Neighbors at equal distance are taken in training-row order. Vote ties go
    to the tied class with the smaller summed neighbor distance, then to the
    lower class code.
    """

    kind = AlgorithmKind.KNN

    def __init__(self, k: int = 5):
        super().__init__()
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k

    def _fit(self, X, y):
        self.X_ = X.copy()
        self.y_ = y.copy()

    def kneighbors(self, X) -> tuple[np.ndarray, np.ndarray]:
        """(distances, training rows) of the k nearest neighbors, nearest first."""
        k = min(self.k, len(self.X_))
        dist = np.empty((len(X), k))
        idx = np.empty((len(X), k), dtype=np.int64)
        for start in range(0, len(X), _CHUNK):
            d = cdist(X[start:start + _CHUNK], self.X_, "euclidean")
            idx[start:start + _CHUNK] = _nearest(d, k)
            dist[start:start + _CHUNK] = np.take_along_axis(d, idx[start:start + _CHUNK], axis=1)
        return dist, idx

    def _predict(self, X):
        dist, idx = self.kneighbors(X)
        labels = self.y_[idx]
        n_codes = int(self.classes_.max()) + 1
        counts = np.zeros((len(X), n_codes))
        dsum = np.zeros((len(X), n_codes))
        rows = np.arange(len(X))
        for col in range(labels.shape[1]):
            counts[rows, labels[:, col]] += 1
            dsum[rows, labels[:, col]] += dist[:, col]
        top = counts == counts.max(axis=1, keepdims=True)
        return np.argmin(np.where(top, dsum, np.inf), axis=1).astype(np.int64)
