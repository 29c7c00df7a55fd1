"""End-to-end runs: data preparation, filtering scenarios and the noise-level matrix."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from labelguard.classifiers import AlgorithmKind, make_classifier
from labelguard.config import ExperimentConfig
from labelguard.dataset import SampleSet, read_feature_csv
from labelguard.features import apply_minmax, apply_pca, assemble_features, fit_minmax, fit_pca
from labelguard.filter import (
    FilterReport,
    NoiseSpec,
    VoteTally,
    apply_standard,
    detection_metrics,
    ensemble_votes,
    inject_noise,
    remove_flagged,
)
from labelguard.ingest import (
    DataError,
    SplitSpec,
    build_split,
    group_by_record,
    load_record,
    read_beats_csv,
)
from labelguard.labels import ClassLabel
from labelguard.rng import SeededSampler, derive_seed
from labelguard.signals import estimate_qrs_duration, preprocess, segment_beats

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# data

def generate_synthetic(n_classes: int = 6, per_class: int = 850, dim: int = 10,
                       separation: float = 8.0, seed: int = 0) -> tuple[SampleSet, SampleSet]:
    """Unit-variance Gaussian blobs, ``per_class`` training and ``per_class`` test rows per class.

    Class means are drawn at random and rescaled so the closest pair is
    exactly ``separation`` apart. A regular simplex is avoided on purpose:
    its centroid lies on every pairwise bisector, which makes linear and
    Gaussian classifiers blind to symmetric label noise.
    """
    if separation <= 0:
        raise ValueError("separation must be positive")
    if not 1 <= n_classes <= len(ClassLabel):
        raise ValueError(f"n_classes must be between 1 and {len(ClassLabel)}")
    rng = SeededSampler(seed).numpy_generator()
    means = rng.normal(size=(n_classes, dim))
    if n_classes > 1:
        gaps = [np.linalg.norm(means[a] - means[b])
                for a in range(n_classes) for b in range(a + 1, n_classes)]
        means *= separation / min(gaps)
    halves = []
    for half in ("train", "test"):
        X = np.vstack([rng.normal(loc=m, scale=1.0, size=(per_class, dim)) for m in means])
        y = np.repeat(np.arange(n_classes), per_class)
        ids = [f"{half}-{ClassLabel(c).name}-{i}" for c in range(n_classes) for i in range(per_class)]
        halves.append(SampleSet(X, y, ids))
    return halves[0], halves[1]


def _annotation_files(path: Path, records: Sequence[str]) -> list[Path]:
    if path.is_dir():
        return [path / f"{rec}.csv" for rec in records if (path / f"{rec}.csv").exists()]
    return [path]


def load_ecg_beats(config: ExperimentConfig) -> SampleSet:
    """Features for every six-class beat of the configured records (unnormalized)."""
    beats = []
    for f in _annotation_files(Path(config.annotations), config.records):
        beats.extend(read_beats_csv(f))
    by_record = group_by_record(beats)
    segments = []
    for rec in config.records:
        if rec not in by_record:
            raise DataError(f"no annotations for record {rec}")
        dat = Path(config.wfdb_dir) / f"{rec}.dat"
        if not dat.exists():
            raise DataError(f"missing signal file {dat}")
        raw = load_record(dat, rec, by_record[rec], config.n_channels, config.sampling_rate)
        if not 0 <= config.lead < raw.channels.shape[0]:
            raise DataError(f"record {rec} has no lead {config.lead}")
        x = preprocess(raw.channels[config.lead].astype(np.float64), config.sampling_rate,
                       config.median_half_window, config.denoise, config.wavelet_levels,
                       config.wavelet)
        anns = raw.annotations
        qrs_given = [None if a.qrs_duration_ms is None else a.qrs_duration_ms / 1000.0 for a in anns]
        segs = segment_beats(x, [a.sample_index for a in anns], [a.label for a in anns],
                             config.sampling_rate, rec, qrs_given)
        for seg in segs:
            if seg.label is not None and seg.qrs_duration_s is None:
                seg = replace(seg, qrs_duration_s=estimate_qrs_duration(
                    x, seg.r_peak_index, config.sampling_rate, seg.start, seg.start + len(seg.samples)))
            segments.append(seg)
        log.info("record %s: %d segments", rec, len(segs))
    return assemble_features(segments, config.morph_length)


@dataclass(frozen=True)
class PreparedData:
    train: SampleSet
    test: SampleSet
    n_raw_features: int
    n_components: int | None = None


def prepare_data(config: ExperimentConfig, beats: SampleSet | None = None) -> PreparedData:
    """Load or generate the clean train/test sets, then normalize and reduce them.

    Normalization and PCA are fit on the training set only. For the ECG
    source, ``beats`` may carry already extracted features.
    """
    if config.source == "synthetic":
        train, test = generate_synthetic(config.synth_classes, config.synth_per_class,
                                         config.synth_dim, config.synth_separation,
                                         derive_seed(config.seed, "synthetic"))
    elif config.source == "wfdb":
        beats = load_ecg_beats(config) if beats is None else beats
        train, test = build_split(beats, SplitSpec(config.split, derive_seed(config.seed, "split")))
    else:
        train, test = read_feature_csv(config.train_csv), read_feature_csv(config.test_csv)
        if train.n_features != test.n_features:
            raise DataError("train and test feature dimensions differ")
    n_raw = train.n_features
    if len(train) == 0 or len(test) == 0:
        raise DataError("training or test set is empty")
    if config.normalize:
        params = fit_minmax(train)
        train, test = apply_minmax(train, params), apply_minmax(test, params)
    n_comp = None
    if config.pca:
        model = fit_pca(train, config.pca_variance, config.pca_components)
        train, test = apply_pca(train, model), apply_pca(test, model)
        n_comp = model.n_components
    return PreparedData(train, test, n_raw, n_comp)


# ---------------------------------------------------------------------------
# scenarios

@dataclass(frozen=True)
class ScenarioResult:
    noise_level: float
    condition: str
    classifier: AlgorithmKind
    rep: int
    accuracy: float | None
    train_size: int
    report: FilterReport | None = None
    error: str | None = None


@dataclass(frozen=True)
class DetectionResult:
    noise_level: float
    standard: int
    rep: int
    report: FilterReport


@dataclass
class MatrixResult:
    accuracy: list[ScenarioResult] = field(default_factory=list)
    detection: list[DetectionResult] = field(default_factory=list)

    @property
    def failures(self) -> list[ScenarioResult]:
        return [r for r in self.accuracy if r.error is not None]

    def __bool__(self) -> bool:
        return bool(self.accuracy or self.detection)


def noisy_training_set(config: ExperimentConfig, data: PreparedData, level: float, rep: int) -> SampleSet:
    # one noise seed per repetition: flips are nested across levels
    seed = derive_seed(config.seed, "noise", rep)
    return inject_noise(data.train, NoiseSpec(level, seed))


def vote(config: ExperimentConfig, noisy: SampleSet, rep: int) -> VoteTally:
    # same fold partition at every level of a repetition
    seed = derive_seed(config.seed, "folds", rep)
    return ensemble_votes(noisy, config.folds, seed, config.classifier_config,
                          config.voters, config.stratified_folds)


def _condition_train(condition: str, noisy: SampleSet, tally: VoteTally | None) -> tuple[SampleSet, FilterReport | None]:
    if condition == "NF":
        return noisy, None
    if condition == "IF":
        return noisy.subset(~noisy.noise_flags), None
    standard = int(condition[1])
    flagged = apply_standard(tally, standard)
    report = detection_metrics(flagged, noisy, standard)
    return remove_flagged(noisy, flagged), report


def _evaluate(config: ExperimentConfig, data: PreparedData, level: float, condition: str, rep: int,
              train: SampleSet, report: FilterReport | None) -> list[ScenarioResult]:
    out = []
    for kind in config.final_classifiers:
        if len(train) == 0:
            out.append(ScenarioResult(level, condition, kind, rep, None, 0, report,
                                      "training set empty after filtering"))
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = make_classifier(kind, config.classifier_config).fit(train.vectors, train.labels)
        acc = float(np.mean(model.predict(data.test.vectors) == data.test.labels))
        out.append(ScenarioResult(level, condition, kind, rep, acc, len(train), report))
    return out


def run_scenario(config: ExperimentConfig, noise_level: float, condition: str,
                 data: PreparedData | None = None) -> list[ScenarioResult]:
    """Accuracy of every final classifier for one (noise level, condition), one row per repetition."""
    condition = condition.upper()
    if condition not in ("NF", "IF", "S1", "S2", "S3"):
        raise ValueError(f"unknown condition {condition!r}")
    data = data or prepare_data(config)
    results = []
    for rep in range(config.reps):
        noisy = noisy_training_set(config, data, noise_level, rep)
        tally = vote(config, noisy, rep) if condition.startswith("S") else None
        train, report = _condition_train(condition, noisy, tally)
        results.extend(_evaluate(config, data, noise_level, condition, rep, train, report))
    return results


def run_matrix(config: ExperimentConfig, data: PreparedData | None = None) -> MatrixResult:
    """Every noise level x condition x repetition.

    At noise level 0 only the unfiltered arm runs. The ensemble vote is
    computed once per (level, repetition) and shared by all standards.
    """
    data = data or prepare_data(config)
    result = MatrixResult()
    filter_conditions = [c for c in config.conditions if c.startswith("S") and int(c[1]) in config.standards]
    for rep in range(config.reps):
        for level in config.levels:
            noisy = noisy_training_set(config, data, level, rep)
            conditions = ["NF"] if level == 0 else [
                c for c in config.conditions if not c.startswith("S") or c in filter_conditions]
            tally = None
            if level > 0 and (config.standards or filter_conditions):
                log.info("rep %d level %s: ensemble vote over %d samples", rep, level, len(noisy))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    tally = vote(config, noisy, rep)
                for standard in config.standards:
                    report = detection_metrics(apply_standard(tally, standard), noisy, standard)
                    result.detection.append(DetectionResult(level, standard, rep, report))
            for condition in conditions:
                train, report = _condition_train(condition, noisy, tally)
                result.accuracy.extend(_evaluate(config, data, level, condition, rep, train, report))
    return result


# ---------------------------------------------------------------------------
# summaries

def _mean(values):
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def _std(values):
    values = [v for v in values if v is not None]
    if len(values) < 2:
        return None
    m = sum(values) / len(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / (len(values) - 1))


def detection_summary(result: MatrixResult) -> list[dict]:
    """Means over repetitions, one row per (standard, noise level)."""
    groups: dict[tuple[int, float], list[FilterReport]] = {}
    for d in result.detection:
        groups.setdefault((d.standard, d.noise_level), []).append(d.report)
    rows = []
    for (standard, level), reports in sorted(groups.items()):
        rows.append({
            "standard": standard, "noise_level": level, "reps": len(reports),
            "ANM": _mean([r.anm for r in reports]), "INM": _mean([r.inm for r in reports]),
            "AINM": _mean([r.ainm for r in reports]),
            "P_D": _mean([r.p_d for r in reports]), "P_FA": _mean([r.p_fa for r in reports]),
        })
    return rows


def accuracy_summary(result: MatrixResult) -> list[dict]:
    """Mean and sample standard deviation over repetitions per (classifier, level, condition).

    Classifiers keep the order in which they were run.
    """
    order = {c: i for i, c in enumerate(("NF", "IF", "S1", "S2", "S3"))}
    kinds: dict[AlgorithmKind, int] = {}
    for r in result.accuracy:
        kinds.setdefault(r.classifier, len(kinds))
    groups: dict[tuple, list[ScenarioResult]] = {}
    for r in result.accuracy:
        groups.setdefault((kinds[r.classifier], r.noise_level, order[r.condition]), []).append(r)
    rows = []
    for (_, level, _), rs in sorted(groups.items()):
        accs = [r.accuracy for r in rs]
        rows.append({
            "classifier": rs[0].classifier.value, "noise_level": level, "condition": rs[0].condition,
            "reps": len(rs), "mean": _mean(accs), "std": _std(accs),
            "errors": sum(r.error is not None for r in rs),
        })
    return rows


def mean_accuracy(result: MatrixResult, classifier: AlgorithmKind | str, level: float, condition: str) -> float | None:
    kind = AlgorithmKind.parse(classifier) if isinstance(classifier, str) else classifier
    return _mean([r.accuracy for r in result.accuracy
                  if r.classifier is kind and r.noise_level == level and r.condition == condition])
