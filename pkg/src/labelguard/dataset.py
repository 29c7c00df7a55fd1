"""Row-aligned feature matrix with labels, identity keys and noise provenance."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from labelguard.labels import ClassLabel


@dataclass(frozen=True)
class SampleSet:
    """Samples as rows of ``vectors``.

    ``labels`` holds the current (possibly corrupted) label codes and
    ``original_labels`` the labels before any noise injection. ``noise_flags``
    is true exactly where the two differ because noise was injected.
    """

    vectors: np.ndarray
    labels: np.ndarray
    ids: np.ndarray
    noise_flags: np.ndarray = None
    original_labels: np.ndarray = None
    feature_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim == 1:
            vectors = vectors.reshape(len(vectors), -1) if len(vectors) else vectors.reshape(0, 0)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        ids = np.asarray([str(i) for i in self.ids], dtype=object).reshape(-1)
        n = len(labels)
        flags = (np.zeros(n, dtype=bool) if self.noise_flags is None
                 else np.asarray(self.noise_flags, dtype=bool).reshape(-1))
        original = labels.copy() if self.original_labels is None else np.asarray(
            self.original_labels, dtype=np.int64).reshape(-1)
        if vectors.shape[0] != n and not (n == 0 and vectors.size == 0):
            raise ValueError(f"{vectors.shape[0]} vectors but {n} labels")
        if not (len(ids) == len(flags) == len(original) == n):
            raise ValueError("row-aligned fields have different lengths")
        if len(set(ids.tolist())) != n:
            raise ValueError("sample ids must be unique")
        if n and (labels.min() < 0 or labels.max() >= len(ClassLabel)):
            raise ValueError("label codes outside the class set")
        for arr in (vectors, labels, ids, flags, original):
            arr.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "noise_flags", flags)
        object.__setattr__(self, "original_labels", original)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.vectors.shape[1] if self.vectors.ndim == 2 else 0

    @classmethod
    def empty(cls, n_features: int = 0) -> "SampleSet":
        return cls(np.zeros((0, n_features)), [], [])

    def subset(self, rows: Sequence[int] | np.ndarray) -> "SampleSet":
        rows = np.asarray(rows)
        if rows.dtype == bool:
            rows = np.flatnonzero(rows)
        rows = rows.astype(np.int64)
        return replace(
            self,
            vectors=self.vectors[rows],
            labels=self.labels[rows],
            ids=self.ids[rows],
            noise_flags=self.noise_flags[rows],
            original_labels=self.original_labels[rows],
        )

    def with_vectors(self, vectors: np.ndarray, feature_names=None) -> "SampleSet":
        return replace(self, vectors=vectors, feature_names=feature_names)

    def row_of(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.ids.tolist())}

    def class_counts(self) -> dict[ClassLabel, int]:
        counts = np.bincount(self.labels, minlength=len(ClassLabel))
        return {c: int(counts[c]) for c in ClassLabel}


def concat(sets: Iterable[SampleSet]) -> SampleSet:
    sets = list(sets)
    if not sets:
        return SampleSet.empty()
    return SampleSet(
        np.vstack([s.vectors for s in sets]),
        np.concatenate([s.labels for s in sets]),
        np.concatenate([s.ids for s in sets]),
        np.concatenate([s.noise_flags for s in sets]),
        np.concatenate([s.original_labels for s in sets]),
        feature_names=sets[0].feature_names,
    )


FEATURE_CSV_PREFIX = ("id", "label", "noise_flag")


def write_feature_csv(samples: SampleSet, path: str | Path) -> None:
    """Dump as ``id,label,noise_flag,f1..fD``."""
    d = samples.n_features
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*FEATURE_CSV_PREFIX, *(f"f{j + 1}" for j in range(d))])
        for i in range(len(samples)):
            writer.writerow([
                samples.ids[i],
                ClassLabel(samples.labels[i]).name,
                int(samples.noise_flags[i]),
                *(repr(float(v)) for v in samples.vectors[i]),
            ])


def read_feature_csv(path: str | Path) -> SampleSet:
    """Inverse of :func:`write_feature_csv`.

    The dump does not store original labels; they are set to the current labels.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if tuple(header[:3]) != FEATURE_CSV_PREFIX or any(
            h != f"f{j + 1}" for j, h in enumerate(header[3:])
        ):
            raise ValueError(f"{path}: header must be id,label,noise_flag,f1..fD")
        d = len(header) - 3
        ids, labels, flags, rows = [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != d + 3:
                raise ValueError(f"{path}: row {lineno} has {len(row)} fields, expected {d + 3}")
            try:
                labels.append(ClassLabel.parse(row[1]))
                flags.append(bool(int(row[2])))
                rows.append([float(v) for v in row[3:]])
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from None
            ids.append(row[0])
    vectors = np.asarray(rows, dtype=np.float64).reshape(len(rows), d)
    return SampleSet(vectors, labels, ids, flags, feature_names=tuple(header[3:]))
