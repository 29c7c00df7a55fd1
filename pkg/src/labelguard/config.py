"""Experiment configuration read from a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored. Unknown keys are errors. Lists
are comma separated; ``auto`` leaves a value to be derived at run time.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from labelguard.classifiers import AlgorithmKind, ClassifierConfig
from labelguard.ingest import MITDB_RECORDS, DEFAULT_SPLIT
from labelguard.labels import ClassLabel

CONDITIONS = ("NF", "IF", "S1", "S2", "S3")
SOURCES = ("synthetic", "wfdb", "features")
FORMATS = ("csv", "markdown")


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _optional(conv: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str):
        return None if text.strip().lower() in ("auto", "none", "") else conv(text)
    return parse


def _list(conv: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        return tuple(conv(p.strip()) for p in text.split(",") if p.strip())
    return parse


def _split_counts(text: str) -> dict[ClassLabel, int]:
    counts = {}
    for part in text.split(","):
        if not part.strip():
            continue
        name, _, value = part.partition(":")
        counts[ClassLabel.parse(name)] = int(value)
    return counts


def _condition(text: str) -> str:
    t = text.strip().upper()
    if t not in CONDITIONS:
        raise ValueError(f"unknown condition {text!r}")
    return t


def _choice(options: tuple[str, ...]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        t = text.strip().lower()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return t
    return parse


def _standard(text: str) -> int:
    s = int(text)
    if s not in (1, 2, 3):
        raise ValueError(f"standard must be 1, 2 or 3, got {s}")
    return s


def _level(text: str) -> float:
    v = float(text)
    if not 0 <= v < 1:
        raise ValueError(f"noise level {v} outside [0, 1)")
    return v


def _kind(text: str) -> AlgorithmKind:
    return AlgorithmKind.parse(text)


@dataclass(frozen=True)
class ExperimentConfig:
    # data source
    source: str = "synthetic"
    synth_classes: int = 6
    synth_per_class: int = 850
    synth_dim: int = 10
    synth_separation: float = 8.0
    wfdb_dir: str | None = None
    annotations: str | None = None
    records: tuple[str, ...] = MITDB_RECORDS
    sampling_rate: float = 360.0
    n_channels: int = 2
    lead: int = 0
    train_csv: str | None = None
    test_csv: str | None = None
    split: Mapping[ClassLabel, int] = field(default_factory=lambda: dict(DEFAULT_SPLIT))
    # preprocessing and features
    median_half_window: int | None = None
    denoise: bool = True
    wavelet: str = "db4"
    wavelet_levels: int = 8
    morph_length: int = 300
    normalize: bool = True
    pca: bool = True
    pca_variance: float = 0.99
    pca_components: int | None = None
    # classifiers
    svm_kernel: str = "rbf"
    svm_gamma: float | None = None
    svm_c: float = 10.0
    svm_tol: float = 1e-3
    knn_k: int = 5
    nb_var_floor: float = 1e-9
    lda_ridge: float = 1e-6
    c45_max_depth: int | None = 25
    c45_min_samples: int = 5
    voters: tuple[AlgorithmKind, ...] = tuple(AlgorithmKind)
    final_classifiers: tuple[AlgorithmKind, ...] = (AlgorithmKind.NB, AlgorithmKind.KNN, AlgorithmKind.LDA)
    # protocol
    levels: tuple[float, ...] = (0.0, 0.05, 0.10, 0.20, 0.30, 0.40)
    standards: tuple[int, ...] = (1, 2, 3)
    conditions: tuple[str, ...] = CONDITIONS
    folds: int = 10
    stratified_folds: bool = False
    reps: int = 5
    seed: int = 0
    out_dir: str = "results"
    format: str = "csv"

    @property
    def classifier_config(self) -> ClassifierConfig:
        return ClassifierConfig(
            svm_kernel=self.svm_kernel, svm_gamma=self.svm_gamma, svm_c=self.svm_c,
            svm_tol=self.svm_tol, knn_k=self.knn_k, nb_var_floor=self.nb_var_floor,
            lda_ridge=self.lda_ridge, c45_max_depth=self.c45_max_depth,
            c45_min_samples=self.c45_min_samples,
        )

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **overrides).validated()

    def validated(self, check_paths: bool = True) -> "ExperimentConfig":
        problems = []
        if self.source not in SOURCES:
            problems.append(f"source must be one of {', '.join(SOURCES)}")
        if self.reps < 1:
            problems.append("reps must be positive")
        if self.folds < 2:
            problems.append("folds must be at least 2")
        if any(not 0 <= lv < 1 for lv in self.levels):
            problems.append("noise levels must lie in [0, 1)")
        if not self.levels:
            problems.append("levels is empty")
        if any(s not in (1, 2, 3) for s in self.standards):
            problems.append("standards must be 1, 2 or 3")
        if not 0 < self.pca_variance <= 1:
            problems.append("pca_variance must be in (0, 1]")
        if self.synth_separation <= 0:
            problems.append("synth_separation must be positive")
        if self.synth_classes < 2 or self.synth_classes > len(ClassLabel):
            problems.append(f"synth_classes must be between 2 and {len(ClassLabel)}")
        if self.format not in FORMATS:
            problems.append(f"format must be one of {', '.join(FORMATS)}")
        if not self.final_classifiers:
            problems.append("final_classifiers is empty")
        if self.source == "wfdb":
            for key in ("wfdb_dir", "annotations"):
                if getattr(self, key) is None:
                    problems.append(f"source=wfdb needs {key}")
                elif check_paths and not Path(getattr(self, key)).exists():
                    problems.append(f"{key}: {getattr(self, key)} does not exist")
        if self.source == "features":
            for key in ("train_csv", "test_csv"):
                if getattr(self, key) is None:
                    problems.append(f"source=features needs {key}")
                elif check_paths and not Path(getattr(self, key)).exists():
                    problems.append(f"{key}: {getattr(self, key)} does not exist")
        try:
            self.classifier_config
        except ValueError as exc:
            problems.append(str(exc))
        if problems:
            raise ConfigError("; ".join(problems))
        return self


_PARSERS: dict[str, Callable[[str], Any]] = {
    "source": _choice(SOURCES),
    "synth_classes": int,
    "synth_per_class": int,
    "synth_dim": int,
    "synth_separation": float,
    "wfdb_dir": _optional(str),
    "annotations": _optional(str),
    "records": _list(str),
    "sampling_rate": float,
    "n_channels": int,
    "lead": int,
    "train_csv": _optional(str),
    "test_csv": _optional(str),
    "split": _split_counts,
    "median_half_window": _optional(int),
    "denoise": _bool,
    "wavelet": str,
    "wavelet_levels": int,
    "morph_length": int,
    "normalize": _bool,
    "pca": _bool,
    "pca_variance": float,
    "pca_components": _optional(int),
    "svm_kernel": _choice(("rbf", "linear")),
    "svm_gamma": _optional(float),
    "svm_c": float,
    "svm_tol": float,
    "knn_k": int,
    "nb_var_floor": float,
    "lda_ridge": float,
    "c45_max_depth": _optional(int),
    "c45_min_samples": int,
    "voters": _list(_kind),
    "final_classifiers": _list(_kind),
    "levels": _list(_level),
    "standards": _list(_standard),
    "conditions": _list(_condition),
    "folds": int,
    "stratified_folds": _bool,
    "reps": int,
    "seed": int,
    "out_dir": str,
    "format": _choice(FORMATS),
}

assert set(_PARSERS) == {f.name for f in dataclasses.fields(ExperimentConfig)}


def parse_config(text: str, base_dir: str | Path | None = None, check_paths: bool = True) -> ExperimentConfig:
    """Parse config text. Relative paths resolve against ``base_dir`` when given."""
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    if base_dir is not None:
        for key in ("wfdb_dir", "annotations", "train_csv", "test_csv", "out_dir"):
            if key in values and values[key] is not None and not Path(values[key]).is_absolute():
                values[key] = str(Path(base_dir) / values[key])
    return ExperimentConfig(**values).validated(check_paths=check_paths)


def load_config(path: str | Path, check_paths: bool = True) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent, check_paths=check_paths)


def dump_config(config: ExperimentConfig) -> str:
    """Render a config back to the text format (every key, sorted as declared)."""
    lines = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if value is None:
            text = "auto"
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif f.name == "split":
            text = ",".join(f"{ClassLabel(k).name}:{v}" for k, v in sorted(value.items()))
        elif isinstance(value, tuple):
            text = ",".join(v.value if isinstance(v, AlgorithmKind) else str(v) for v in value)
        else:
            text = str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
