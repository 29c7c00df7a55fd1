"""Five multiclass classifiers behind one train/predict contract."""

from __future__ import annotations

import numpy as np

from labelguard.classifiers.base import AlgorithmKind, Classifier, ClassifierConfig
from labelguard.classifiers.bayes import GaussianNBClassifier
from labelguard.classifiers.c45 import C45Classifier
from labelguard.classifiers.knn import KNNClassifier
from labelguard.classifiers.lda import LDAClassifier
from labelguard.classifiers.svm import SVMClassifier
from labelguard.dataset import SampleSet
from labelguard.labels import ClassLabel

ALL_KINDS = (AlgorithmKind.SVM, AlgorithmKind.C45, AlgorithmKind.NB, AlgorithmKind.KNN, AlgorithmKind.LDA)


def make_classifier(kind: AlgorithmKind | str, config: ClassifierConfig | None = None) -> Classifier:
    kind = AlgorithmKind.parse(kind) if isinstance(kind, str) else kind
    cfg = config or ClassifierConfig()
    if kind is AlgorithmKind.SVM:
        return SVMClassifier(C=cfg.svm_c, kernel=cfg.svm_kernel, gamma=cfg.svm_gamma,
                             tol=cfg.svm_tol, max_iter=cfg.svm_max_iter)
    if kind is AlgorithmKind.KNN:
        return KNNClassifier(k=cfg.knn_k)
    if kind is AlgorithmKind.NB:
        return GaussianNBClassifier(var_floor=cfg.nb_var_floor)
    if kind is AlgorithmKind.LDA:
        return LDAClassifier(ridge=cfg.lda_ridge)
    return C45Classifier(max_depth=cfg.c45_max_depth, min_samples=cfg.c45_min_samples)


def train(kind: AlgorithmKind | str, samples: SampleSet, config: ClassifierConfig | None = None) -> Classifier:
    if len(samples) == 0:
        raise ValueError("cannot train on an empty set")
    return make_classifier(kind, config).fit(samples.vectors, samples.labels)


def predict(model: Classifier, x) -> ClassLabel:
    """Label of a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict takes one feature vector; use model.predict for batches")
    return ClassLabel(int(model.predict(x.reshape(1, -1))[0]))


def accuracy(model: Classifier, test: SampleSet) -> float:
    if len(test) == 0:
        raise ValueError("accuracy of an empty test set is undefined")
    return float(np.mean(model.predict(test.vectors) == test.labels))


__all__ = [
    "ALL_KINDS", "AlgorithmKind", "Classifier", "ClassifierConfig", "C45Classifier",
    "GaussianNBClassifier", "KNNClassifier", "LDAClassifier", "SVMClassifier",
    "accuracy", "make_classifier", "predict", "train",
]
