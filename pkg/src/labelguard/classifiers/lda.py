from __future__ import annotations

import numpy as np

from labelguard.classifiers.base import AlgorithmKind, Classifier


class LDAClassifier(Classifier):
    """Linear discriminant with a pooled within-class covariance.

    For two classes the discriminant direction is the Fisher direction
    ``Sw^-1 (m1 - m2)``; with more classes each class gets the linear score
    ``x' S^-1 m_c - m_c' S^-1 m_c / 2 + log prior_c``. The pooled scatter is
    ridged by ``ridge * trace / D`` before inversion.
    """

    kind = AlgorithmKind.LDA

    def __init__(self, ridge: float = 1e-6):
        super().__init__()
        self.ridge = ridge

    def _fit(self, X, y):
        n, d = X.shape
        self.means_ = np.vstack([X[y == c].mean(axis=0) for c in self.classes_])
        scatter = np.zeros((d, d))
        for k, c in enumerate(self.classes_):
            centered = X[y == c] - self.means_[k]
            scatter += centered.T @ centered
        cov = scatter / max(n - len(self.classes_), 1)
        trace = np.trace(cov)
        cov[np.diag_indices(d)] += self.ridge * (trace / d if trace > 0 else 1.0)
        self.covariance_ = cov
        counts = np.array([(y == c).sum() for c in self.classes_], dtype=np.float64)
        self.priors_ = counts / n
        solved = np.linalg.solve(cov, self.means_.T)  # S^-1 m_c as columns
        self.coef_ = solved.T
        self.intercept_ = -0.5 * np.einsum("kd,kd->k", self.means_, self.coef_) + np.log(self.priors_)

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.coef_.T + self.intercept_

    def _predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)].astype(np.int64)

    def fisher_criterion(self, w: np.ndarray, X, y, a: int, b: int) -> float:
        """Squared gap between projected class means over the summed projected within-class scatter."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        pa, pb = X[y == a] @ w, X[y == b] @ w
        spread = np.sum((pa - pa.mean()) ** 2) + np.sum((pb - pb.mean()) ** 2)
        return float((pa.mean() - pb.mean()) ** 2 / spread)
