"""Beat feature vectors, min-max normalization and PCA."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from labelguard.dataset import SampleSet
from labelguard.signals import BeatSegment, resample_morphology

MORPHOLOGY_LENGTH = 300
RR_HISTORY = 10


def feature_names(n_morphology: int = MORPHOLOGY_LENGTH) -> tuple[str, ...]:
    return (*(f"morph{i + 1}" for i in range(n_morphology)), "qrs_duration_s", "rr_s", "rr_avg10_s")


def assemble_features(beats: Sequence[BeatSegment], n_morphology: int = MORPHOLOGY_LENGTH) -> SampleSet:
    """One row per labeled beat: resampled morphology, QRS duration, RR, mean of the last 10 RR.

    ``beats`` must be in temporal order within each record. The RR average
    includes the current beat and uses fewer terms near the start of a record.
    Beats with ``label=None`` feed the RR history but produce no row.
    """
    rows, labels, ids = [], [], []
    history: dict[str, list[float]] = {}
    for beat in beats:
        rrs = history.setdefault(beat.record_id, [])
        rrs.append(beat.prev_rr_s)
        if beat.label is None:
            continue
        if beat.qrs_duration_s is None:
            raise ValueError(f"beat at {beat.record_id}:{beat.r_peak_index} has no QRS duration")
        recent = rrs[-RR_HISTORY:]
        rows.append(np.concatenate([
            resample_morphology(beat.samples, n_morphology),
            [beat.qrs_duration_s, beat.prev_rr_s, sum(recent) / len(recent)],
        ]))
        labels.append(int(beat.label))
        ids.append(f"{beat.record_id}:{beat.r_peak_index}")
    names = feature_names(n_morphology)
    if not rows:
        return SampleSet(np.zeros((0, len(names))), [], [], feature_names=names)
    vectors = np.vstack(rows)
    if not np.all(np.isfinite(vectors)):
        raise ValueError("non-finite feature values")
    return SampleSet(vectors, labels, ids, feature_names=names)


@dataclass(frozen=True)
class NormalizationParams:
    minimum: np.ndarray
    maximum: np.ndarray


def fit_minmax(train: SampleSet) -> NormalizationParams:
    if len(train) == 0:
        raise ValueError("cannot fit normalization on an empty set")
    return NormalizationParams(train.vectors.min(axis=0), train.vectors.max(axis=0))


def apply_minmax(samples: SampleSet, params: NormalizationParams) -> SampleSet:
    """Map to [0, 1] with the training range; constant features become 0, outliers clamp."""
    if samples.n_features != len(params.minimum):
        raise ValueError(f"set has {samples.n_features} features, params have {len(params.minimum)}")
    span = params.maximum - params.minimum
    safe = np.where(span > 0, span, 1.0)
    scaled = (samples.vectors - params.minimum) / safe
    scaled[:, span <= 0] = 0.0
    return samples.with_vectors(np.clip(scaled, 0.0, 1.0), samples.feature_names)


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # rows are principal directions
    explained_variance: np.ndarray
    total_variance: float

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def explained_variance_ratio(self) -> np.ndarray:
        return self.explained_variance / self.total_variance


def fit_pca(train: SampleSet | np.ndarray, variance_target: float = 0.99,
            n_components: int | None = None) -> PcaModel:
    """Eigendecomposition of the sample covariance of the training rows.

    Keeps the fewest leading components whose cumulative explained-variance
    ratio reaches ``variance_target``, or exactly ``n_components`` when given.
    Directions with zero variance are never kept.
    """
    X = train.vectors if isinstance(train, SampleSet) else np.asarray(train, dtype=np.float64)
    if len(X) < 2:
        raise ValueError("PCA needs at least 2 rows")
    if not 0 < variance_target <= 1:
        raise ValueError("variance_target must be in (0, 1]")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (len(X) - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    total = float(np.sum(np.clip(evals, 0, None)))
    positive = evals > max(total, 1e-300) * 1e-12
    evals, evecs = evals[positive], evecs[:, positive]
    if len(evals) == 0:
        raise ValueError("training data has zero variance")
    if n_components is not None:
        if n_components < 1:
            raise ValueError("n_components must be positive")
        keep = min(n_components, len(evals))
    else:
        cumulative = np.cumsum(evals) / total
        keep = int(np.searchsorted(cumulative, variance_target - 1e-12) + 1)
        keep = min(keep, len(evals))
    components = evecs[:, :keep].T
    # deterministic sign: largest-magnitude loading positive
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(keep), pivots])
    components = components * signs[:, None]
    return PcaModel(mean, components, evals[:keep].copy(), total)


def apply_pca(samples: SampleSet, model: PcaModel) -> SampleSet:
    if samples.n_features != len(model.mean):
        raise ValueError(f"set has {samples.n_features} features, model expects {len(model.mean)}")
    projected = (samples.vectors - model.mean) @ model.components.T
    names = tuple(f"pc{i + 1}" for i in range(model.n_components))
    return samples.with_vectors(projected, names)
