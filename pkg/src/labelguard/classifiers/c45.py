"""C4.5-style decision tree over continuous features.

Each internal node tests ``x[feature] <= threshold`` with thresholds at
midpoints between consecutive distinct sorted values. Per feature the
threshold with the largest information gain is kept; among features, the one
with the largest gain ratio wins, considering only features whose gain is at
least the average positive gain (Quinlan's guard against tiny splits with
inflated ratios). Missing values, attribute costs and post-pruning are not
handled; growth stops on purity, ``max_depth`` or ``min_samples``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from labelguard.classifiers.base import AlgorithmKind, Classifier

_EPS = 1e-12


def entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits of class-count rows (last axis)."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float
    gain_ratio: float


def feature_splits(X: np.ndarray, onehot: np.ndarray):
    """Best gain threshold for every feature at once.

    Returns (gain, gain_ratio, threshold, valid) arrays over features; a
    feature is invalid when it is constant over the rows.
    """
    n, n_feat = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    cum = np.cumsum(onehot[order], axis=0)  # (n, F, K)
    total = cum[-1, 0]
    left = cum[:-1]
    right = total - left
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    gains = entropy(total) - (n_left * entropy(left) + n_right * entropy(right)) / n
    boundary = xs[:-1] < xs[1:]
    gains = np.where(boundary, gains, -np.inf)
    k = np.argmax(gains, axis=0)
    cols = np.arange(n_feat)
    best = gains[k, cols]
    valid = np.isfinite(best)
    pl = (k + 1) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        split_info = -(pl * np.log2(pl) + (1 - pl) * np.log2(1 - pl))
        ratio = np.where(split_info > 0, best / split_info, 0.0)
    lo = xs[k, cols]
    hi = xs[np.minimum(k + 1, n - 1), cols]
    thr = (lo + hi) / 2.0
    thr = np.where((lo <= thr) & (thr < hi), thr, lo)
    return best, ratio, thr, valid


def choose_split(X: np.ndarray, onehot: np.ndarray) -> Split | None:
    if len(X) < 2:
        return None
    gains, ratios, thresholds, valid = feature_splits(X, onehot)
    if not valid.any():
        return None
    positive = valid & (gains > _EPS)
    if not positive.any():
        # no informative split: any split still separates distinct points
        f = int(np.flatnonzero(valid)[0])
        return Split(f, float(thresholds[f]), 0.0, 0.0)
    avg = gains[positive].mean()
    eligible = np.flatnonzero(positive & (gains >= avg - _EPS))
    # largest ratio, then largest gain, then lowest feature index
    f = int(eligible[np.lexsort((-gains[eligible], -ratios[eligible]))[0]])
    return Split(f, float(thresholds[f]), float(gains[f]), float(ratios[f]))


class C45Classifier(Classifier):
    kind = AlgorithmKind.C45

    def __init__(self, max_depth: int | None = 25, min_samples: int = 5):
        super().__init__()
        self.max_depth = max_depth
        self.min_samples = min_samples

    def _fit(self, X, y):
        n_codes = int(self.classes_.max()) + 1
        onehot = np.eye(n_codes)[y]
        self.feature_: list[int] = []
        self.threshold_: list[float] = []
        self.left_: list[int] = []
        self.right_: list[int] = []
        self.value_: list[int] = []
        self._grow(X, onehot, np.arange(len(X)), 0)
        self.feature_ = np.asarray(self.feature_, dtype=np.int64)
        self.threshold_ = np.asarray(self.threshold_)
        self.left_ = np.asarray(self.left_, dtype=np.int64)
        self.right_ = np.asarray(self.right_, dtype=np.int64)
        self.value_ = np.asarray(self.value_, dtype=np.int64)

    def _new_node(self, counts: np.ndarray) -> int:
        self.feature_.append(-1)
        self.threshold_.append(0.0)
        self.left_.append(-1)
        self.right_.append(-1)
        self.value_.append(int(np.argmax(counts)))  # majority, ties to lower code
        return len(self.feature_) - 1

    def _grow(self, X, onehot, rows, depth) -> int:
        # explicit stack keeps deep unlimited trees off the recursion limit
        root = self._new_node(onehot[rows].sum(axis=0))
        stack = [(root, rows, depth)]
        while stack:
            node, rows, depth = stack.pop()
            counts = onehot[rows].sum(axis=0)
            if (np.count_nonzero(counts) <= 1
                    or len(rows) < self.min_samples
                    or (self.max_depth is not None and depth >= self.max_depth)):
                continue
            split = choose_split(X[rows], onehot[rows])
            if split is None:
                continue
            go_left = X[rows, split.feature] <= split.threshold
            left_rows, right_rows = rows[go_left], rows[~go_left]
            left = self._new_node(onehot[left_rows].sum(axis=0))
            right = self._new_node(onehot[right_rows].sum(axis=0))
            self.feature_[node] = split.feature
            self.threshold_[node] = split.threshold
            self.left_[node] = left
            self.right_[node] = right
            stack.append((right, right_rows, depth + 1))
            stack.append((left, left_rows, depth + 1))
        return root

    def _predict(self, X):
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature_[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            goes_left = X[idx, self.feature_[cur]] <= self.threshold_[cur]
            node[idx] = np.where(goes_left, self.left_[cur], self.right_[cur])
            active = self.feature_[node] >= 0
        return self.value_[node]

    @property
    def node_count(self) -> int:
        return len(self.feature_) if self.constant_ is None else 1

    @property
    def depth(self) -> int:
        if self.constant_ is not None:
            return 0
        depth = np.zeros(len(self.feature_), dtype=np.int64)
        for i in range(len(self.feature_)):
            if self.feature_[i] >= 0:
                depth[self.left_[i]] = depth[self.right_[i]] = depth[i] + 1
        return int(depth.max())

    def summary(self) -> dict:
        out = super().summary()
        out["nodes"] = self.node_count
        out["depth"] = self.depth
        return out
