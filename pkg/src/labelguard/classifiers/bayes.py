from __future__ import annotations

import numpy as np

from labelguard.classifiers.base import AlgorithmKind, Classifier


class GaussianNBClassifier(Classifier):
    """Naive Bayes with independent Gaussian likelihoods per feature.

    Priors are training class frequencies; variances are floored so the
    log-posterior stays finite.
    """

    kind = AlgorithmKind.NB

    def __init__(self, var_floor: float = 1e-9, priors: dict[int, float] | None = None):
        super().__init__()
        self.var_floor = var_floor
        self.priors = priors

    def _fit(self, X, y):
        self.theta_ = np.vstack([X[y == c].mean(axis=0) for c in self.classes_])
        var = np.vstack([X[y == c].var(axis=0) for c in self.classes_])
        self.var_ = np.maximum(var, self.var_floor)
        if self.priors is None:
            counts = np.array([(y == c).sum() for c in self.classes_], dtype=np.float64)
            self.class_prior_ = counts / counts.sum()
        else:
            self.class_prior_ = np.array([self.priors[int(c)] for c in self.classes_], dtype=np.float64)

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((len(X), len(self.classes_)))
        for k in range(len(self.classes_)):
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * self.var_[k]))
            ll = ll - 0.5 * np.sum((X - self.theta_[k]) ** 2 / self.var_[k], axis=1)
            with np.errstate(divide="ignore"):
                out[:, k] = ll + np.log(self.class_prior_[k])
        return out

    def _predict(self, X):
        return self.classes_[np.argmax(self.joint_log_likelihood(X), axis=1)].astype(np.int64)
