"""Label-noise injection, the k-fold ensemble filter, voting standards and detection metrics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from labelguard.classifiers import ALL_KINDS, AlgorithmKind, ClassifierConfig, make_classifier
from labelguard.dataset import SampleSet
from labelguard.rng import SeededSampler, derive_seed

#: Votes needed to flag a sample under standards 1, 2 and 3.
STANDARD_THRESHOLDS = {1: 5, 2: 4, 3: 3}

FILTER_REPORT_HEADER = ("noise_level", "standard", "ANM", "INM", "AINM", "P_D", "P_FA", "seed")


@dataclass(frozen=True)
class NoiseSpec:
    level: float
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.level < 1:
            raise ValueError(f"noise level {self.level} outside [0, 1)")


def noise_count(n: int, level: float) -> int:
    """floor(n * level), immune to representation error such as 100 * 0.29 = 28.999..."""
    return math.floor(n * level + 1e-9)


def inject_noise(train: SampleSet, spec: NoiseSpec) -> SampleSet:
    """Relabel ``floor(n_c * level)`` samples of every class c.

    Each class has its own victim stream (partial Fisher-Yates over the
    class's rows) and target stream (uniform over the other classes present
    in ``train``). Both are consumed in draw order, so for a fixed seed the
    samples flipped at a lower level are a prefix of those flipped at a
    higher level, with the same new labels. Feature vectors are untouched.
    """
    if spec.level == 0 or len(train) == 0:
        return train
    labels = train.labels.copy()
    flags = train.noise_flags.copy()
    present = np.unique(train.labels)
    if len(present) < 2:
        return train
    for c in present:
        rows = np.flatnonzero(train.labels == c)
        n_changed = noise_count(len(rows), spec.level)
        if n_changed == 0:
            continue
        victims = SeededSampler(derive_seed(spec.seed, "noise-victims", int(c)))
        targets = SeededSampler(derive_seed(spec.seed, "noise-targets", int(c)))
        others = present[present != c]
        for r in rows[victims.sample(len(rows), n_changed)]:
            labels[r] = others[targets.randbelow(len(others))]
            flags[r] = True
    return replace(train, labels=labels, noise_flags=flags)


def kfold_partition(n: int | SampleSet, k: int, seed: int,
                    labels: Sequence[int] | None = None) -> list[np.ndarray]:
    """Random partition of row indices into ``k`` folds whose sizes differ by at most one.

    Rows are shuffled and dealt into contiguous blocks, the larger blocks
    first. Passing ``labels`` stratifies: each class is shuffled separately
    and dealt round-robin, continuing where the previous class stopped.
    """
    if isinstance(n, SampleSet):
        n = len(n)
    if k < 1:
        raise ValueError("k must be positive")
    if k > n:
        raise ValueError(f"cannot split {n} samples into {k} folds")
    sampler = SeededSampler(seed)
    if labels is None:
        return [np.sort(f) for f in np.array_split(sampler.permutation(n), k)]
    labels = np.asarray(labels)
    folds: list[list[int]] = [[] for _ in range(k)]
    slot = 0
    for c in np.unique(labels):
        rows = np.flatnonzero(labels == c)
        for r in rows[sampler.permutation(len(rows))]:
            folds[slot].append(int(r))
            slot = (slot + 1) % k
    return [np.sort(np.asarray(f, dtype=np.int64)) for f in folds]


@dataclass(frozen=True)
class VoteTally:
    """Per-sample count of classifiers whose held-out prediction disagreed with the label."""

    ids: np.ndarray
    counts: np.ndarray
    votes: dict[AlgorithmKind, np.ndarray]  # per-kind boolean disagreement

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.ids.tolist(), self.counts.tolist()))


def ensemble_votes(train: SampleSet, k: int = 10, seed: int = 0,
                   config: ClassifierConfig | None = None,
                   kinds: Sequence[AlgorithmKind] = ALL_KINDS,
                   stratified: bool = False) -> VoteTally:
    """One k-fold sweep: every classifier kind, trained on k-1 folds, votes on the held-out fold."""
    folds = kfold_partition(len(train), k, seed, train.labels if stratified else None)
    votes = {kind: np.zeros(len(train), dtype=bool) for kind in kinds}
    all_rows = np.arange(len(train))
    for fold in folds:
        rest = np.setdiff1d(all_rows, fold, assume_unique=True)
        X_fit, y_fit = train.vectors[rest], train.labels[rest]
        X_val, y_val = train.vectors[fold], train.labels[fold]
        for kind in kinds:
            model = make_classifier(kind, config).fit(X_fit, y_fit)
            votes[kind][fold] = model.predict(X_val) != y_val
    counts = np.sum([v.astype(np.int64) for v in votes.values()], axis=0) if votes else (
        np.zeros(len(train), dtype=np.int64))
    return VoteTally(train.ids.copy(), np.asarray(counts, dtype=np.int64), votes)


def apply_standard(tally: VoteTally, standard: int) -> frozenset[str]:
    """Ids flagged as mislabeled: 5 votes (standard 1), 4+ (standard 2), 3+ (standard 3)."""
    try:
        threshold = STANDARD_THRESHOLDS[standard]
    except KeyError:
        raise ValueError(f"unknown standard {standard!r}; expected 1, 2 or 3") from None
    return frozenset(tally.ids[tally.counts >= threshold].tolist())


def remove_flagged(train: SampleSet, flagged: Iterable[str]) -> SampleSet:
    flagged = set(flagged)
    known = set(train.ids.tolist())
    unknown = flagged - known
    if unknown:
        raise ValueError(f"{len(unknown)} flagged id(s) not in the training set, e.g. {sorted(unknown)[0]!r}")
    keep = np.array([sid not in flagged for sid in train.ids.tolist()], dtype=bool)
    return train.subset(keep)


@dataclass(frozen=True)
class FilterReport:
    """Detection counts and rates; rates are None when nothing was mislabeled."""

    anm: int
    inm: int
    ainm: int
    p_d: float | None
    p_fa: float | None
    flagged: frozenset[str]
    standard: int | None = None


def detection_metrics(flagged: Iterable[str], train: SampleSet, standard: int | None = None) -> FilterReport:
    flagged = frozenset(flagged)
    noisy = set(train.ids[train.noise_flags].tolist())
    anm = len(noisy)
    inm = len(flagged)
    ainm = len(flagged & noisy)
    if anm == 0:
        return FilterReport(anm, inm, ainm, None, None, flagged, standard)
    return FilterReport(anm, inm, ainm, ainm / anm, (inm - ainm) / anm, flagged, standard)


def filter_reports(tally: VoteTally, train: SampleSet, standards: Sequence[int] = (1, 2, 3)) -> dict[int, FilterReport]:
    return {s: detection_metrics(apply_standard(tally, s), train, s) for s in standards}


def _fmt_rate(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_filter_reports(path: str | Path, rows: Iterable[tuple[float, FilterReport, int]]) -> None:
    """Write ``(noise_level, report, seed)`` rows as ``noise_level,standard,ANM,INM,AINM,P_D,P_FA,seed``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FILTER_REPORT_HEADER)
        for level, rep, seed in rows:
            writer.writerow([repr(float(level)), rep.standard, rep.anm, rep.inm, rep.ainm,
                             _fmt_rate(rep.p_d), _fmt_rate(rep.p_fa), seed])


def read_filter_reports(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != FILTER_REPORT_HEADER:
            raise ValueError(f"{path}: header must be {','.join(FILTER_REPORT_HEADER)}")
        out = []
        for row in reader:
            out.append({
                "noise_level": float(row["noise_level"]),
                "standard": int(row["standard"]),
                "ANM": int(row["ANM"]),
                "INM": int(row["INM"]),
                "AINM": int(row["AINM"]),
                "P_D": float(row["P_D"]) if row["P_D"] else None,
                "P_FA": float(row["P_FA"]) if row["P_FA"] else None,
                "seed": int(row["seed"]),
            })
    return out
