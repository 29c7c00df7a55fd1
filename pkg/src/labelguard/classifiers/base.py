from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from labelguard.dataset import SampleSet
from labelguard.labels import ClassLabel


class AlgorithmKind(str, enum.Enum):
    SVM = "SVM"
    KNN = "KNN"
    NB = "NB"
    LDA = "LDA"
    C45 = "C45"

    @classmethod
    def parse(cls, text: str) -> "AlgorithmKind":
        key = text.strip().upper().replace(".", "")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown algorithm {text!r}") from None


@dataclass(frozen=True)
class ClassifierConfig:
    """Hyperparameters for all five algorithms. ``svm_gamma=None`` means 1/D."""

    svm_kernel: str = "rbf"
    svm_gamma: Optional[float] = None
    svm_c: float = 10.0
    svm_tol: float = 1e-3
    svm_max_iter: int = 1_000_000
    knn_k: int = 5
    nb_var_floor: float = 1e-9
    lda_ridge: float = 1e-6
    c45_max_depth: Optional[int] = 25
    c45_min_samples: int = 5

    def __post_init__(self):
        if self.svm_kernel not in ("rbf", "linear"):
            raise ValueError(f"unknown SVM kernel {self.svm_kernel!r}")
        if self.svm_gamma is not None and self.svm_gamma <= 0:
            raise ValueError("svm_gamma must be positive")
        if self.svm_c <= 0:
            raise ValueError("svm_c must be positive")
        if self.knn_k < 1:
            raise ValueError("knn_k must be positive")
        if self.c45_min_samples < 1:
            raise ValueError("c45_min_samples must be positive")


class Classifier:
    """Shared fit/predict plumbing: validation, degenerate single-class models."""

    kind: AlgorithmKind

    def __init__(self):
        self.classes_: np.ndarray | None = None
        self.n_features_: int | None = None
        self.constant_: int | None = None

    def fit(self, X, y) -> "Classifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) == 0:
            raise ValueError("training set is empty")
        if len(y) != len(X):
            raise ValueError("X and y have different lengths")
        self.n_features_ = X.shape[1]
        self.classes_ = np.unique(y)
        if len(self.classes_) == 1:
            self.constant_ = int(self.classes_[0])
            return self
        self.constant_ = None
        self._fit(X, y)
        return self

    def predict(self, X) -> np.ndarray:
        if self.classes_ is None:
            raise RuntimeError("classifier is not trained")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features_:
            raise ValueError(f"expected {self.n_features_} features, got {X.shape[1]}")
        if self.constant_ is not None:
            return np.full(len(X), self.constant_, dtype=np.int64)
        if len(X) == 0:
            return np.zeros(0, dtype=np.int64)
        return self._predict(X)

    def _fit(self, X: np.ndarray, y: np.ndarray) -> None:
        raise NotImplementedError

    def _predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def summary(self) -> dict:
        return {"kind": self.kind.value, "classes": [ClassLabel(c).name for c in self.classes_]}
