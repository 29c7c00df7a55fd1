"""Loading ECG records and beat annotations, and the class-stratified train/test split."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from labelguard.dataset import SampleSet
from labelguard.labels import MIT_BEAT_SYMBOLS, MIT_NON_BEAT_SYMBOLS, MIT_TO_CLASS, ClassLabel
from labelguard.rng import SeededSampler

#: The 20 MIT-BIH records the experiment draws beats from.
MITDB_RECORDS = (
    "100", "102", "104", "105", "106", "107", "118", "119", "200", "201",
    "202", "203", "205", "208", "209", "212", "213", "214", "215", "217",
)

#: Reference per-class beat totals over MITDB_RECORDS.
MITDB_CLASS_TOTALS = {
    ClassLabel.N: 24150, ClassLabel.A: 338, ClassLabel.V: 2900,
    ClassLabel.RB: 3689, ClassLabel.P: 3450, ClassLabel.LB: 1801,
}

#: Training-set size per class (5100 beats in total).
DEFAULT_SPLIT = {
    ClassLabel.N: 1500, ClassLabel.A: 100, ClassLabel.V: 1000,
    ClassLabel.RB: 1000, ClassLabel.P: 1000, ClassLabel.LB: 500,
}

ANNOTATION_HEADER = ("record_id", "sample_index", "label")
BEATS_HEADER = ("record_id", "r_peak_index", "label", "qrs_duration_ms")


class DataError(ValueError):
    """Input data cannot be used."""


class MalformedFileError(DataError):
    pass


class SchemaError(DataError):
    pass


class CsvParseError(DataError):
    def __init__(self, path, row: int, message: str):
        super().__init__(f"{path}: row {row}: {message}")
        self.row = row


class CapacityError(DataError):
    def __init__(self, label: ClassLabel, requested: int, available: int):
        super().__init__(
            f"class {label.name}: requested {requested} training beats, only {available} available"
        )
        self.label = label


# ---------------------------------------------------------------------------
# WFDB format 212

def read_wfdb_212(data: bytes, n_channels: int) -> np.ndarray:
    """Decode format-212 bytes into an ``(n_frames, n_channels)`` int16 array.

    Each 3-byte group packs two 12-bit two's-complement samples; samples are
    interleaved across channels.
    """
    if n_channels < 1:
        raise ValueError("n_channels must be positive")
    if len(data) % 3:
        raise MalformedFileError(f"format 212 data length {len(data)} is not a multiple of 3")
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3).astype(np.int16)
    out = np.empty(2 * len(raw), dtype=np.int16)
    out[0::2] = raw[:, 0] | ((raw[:, 1] & 0x0F) << 8)
    out[1::2] = raw[:, 2] | ((raw[:, 1] & 0xF0) << 4)
    out[out > 2047] -= 4096
    if len(out) % n_channels:
        raise MalformedFileError(
            f"{len(out)} samples do not fill whole frames of {n_channels} channels"
        )
    return out.reshape(-1, n_channels)


def write_wfdb_212(samples: np.ndarray) -> bytes:
    """Encode samples (frames x channels, or flat) as format-212 bytes."""
    flat = np.asarray(samples, dtype=np.int64).reshape(-1)
    if len(flat) % 2:
        raise ValueError("format 212 needs an even number of samples")
    if flat.size and (flat.min() < -2048 or flat.max() > 2047):
        raise ValueError("sample outside the 12-bit range")
    u = (flat & 0xFFF).reshape(-1, 2)
    out = np.empty((len(u), 3), dtype=np.uint8)
    out[:, 0] = u[:, 0] & 0xFF
    out[:, 1] = ((u[:, 0] >> 8) & 0x0F) | ((u[:, 1] >> 4) & 0xF0)
    out[:, 2] = u[:, 1] & 0xFF
    return out.tobytes()


# ---------------------------------------------------------------------------
# records and annotations

@dataclass(frozen=True)
class Annotation:
    sample_index: int
    label: ClassLabel | None  # None: a beat outside the six classes (kept as an R-peak)
    qrs_duration_ms: float | None = None


@dataclass(frozen=True)
class RawRecord:
    record_id: str
    sampling_rate_hz: float
    channels: np.ndarray  # (n_channels, n_samples) ADC units
    annotations: tuple[Annotation, ...]

    def __post_init__(self):
        if self.sampling_rate_hz <= 0:
            raise ValueError("sampling rate must be positive")
        channels = np.atleast_2d(np.asarray(self.channels))
        object.__setattr__(self, "channels", channels)
        length = channels.shape[1]
        prev = -1
        for ann in self.annotations:
            if ann.sample_index <= prev:
                raise DataError(f"record {self.record_id}: annotation indices not strictly increasing")
            if ann.sample_index >= length:
                raise DataError(f"record {self.record_id}: annotation at {ann.sample_index} "
                                f"beyond signal length {length}")
            prev = ann.sample_index


@dataclass(frozen=True)
class BeatDescriptor:
    record_id: str
    r_peak_index: int
    label: ClassLabel | None
    qrs_duration_ms: float | None = None


def _parse_label(text: str) -> tuple[bool, ClassLabel | None]:
    """Return (is_beat, label). Raises ValueError for unknown symbols."""
    text = text.strip()
    if text in ClassLabel.__members__:
        return True, ClassLabel[text]
    if text in MIT_TO_CLASS:
        return True, MIT_TO_CLASS[text]
    if text in MIT_BEAT_SYMBOLS:
        return True, None
    if text in MIT_NON_BEAT_SYMBOLS:
        return False, None
    raise ValueError(f"unknown class label {text!r}")


def read_beats_csv(path: str | Path) -> list[BeatDescriptor]:
    """Read beat positions and labels.

    Accepts either ``record_id,sample_index,label`` (annotation dump) or
    ``record_id,r_peak_index,label[,qrs_duration_ms]`` (pre-segmented beats).
    Labels may be class names (N, A, V, RB, P, LB) or MIT-BIH symbols; other
    beat symbols are kept with ``label=None`` so they still count as R-peaks,
    and non-beat symbols are skipped.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise SchemaError(f"{path}: missing header") from None
        if header in (ANNOTATION_HEADER, BEATS_HEADER[:3], BEATS_HEADER):
            has_qrs = header == BEATS_HEADER
        else:
            expected = ANNOTATION_HEADER if "sample_index" in header else BEATS_HEADER
            missing = [c for c in expected if c not in header]
            raise SchemaError(f"{path}: header {','.join(header)!r} does not match the beats schema"
                              + (f"; missing column(s) {', '.join(missing)}" if missing else ""))
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(header):
                raise CsvParseError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
            try:
                index = int(row[1])
            except ValueError:
                raise CsvParseError(path, lineno, f"non-numeric sample index {row[1]!r}") from None
            if index < 0:
                raise CsvParseError(path, lineno, "negative sample index")
            try:
                is_beat, label = _parse_label(row[2])
            except ValueError as exc:
                raise CsvParseError(path, lineno, str(exc)) from None
            qrs = None
            if has_qrs and row[3].strip():
                try:
                    qrs = float(row[3])
                except ValueError:
                    raise CsvParseError(path, lineno, f"non-numeric QRS duration {row[3]!r}") from None
            if is_beat:
                out.append(BeatDescriptor(row[0].strip(), index, label, qrs))
    return out


def group_by_record(beats: Sequence[BeatDescriptor]) -> dict[str, list[BeatDescriptor]]:
    grouped: dict[str, list[BeatDescriptor]] = {}
    for b in beats:
        grouped.setdefault(b.record_id, []).append(b)
    for rec in grouped.values():
        rec.sort(key=lambda b: b.r_peak_index)
    return grouped


def load_record(dat_path: str | Path, record_id: str, beats: Sequence[BeatDescriptor],
                n_channels: int = 2, sampling_rate_hz: float = 360.0) -> RawRecord:
    """Read a format-212 ``.dat`` file and attach beat annotations.

    Header values come from the caller; ``.hea`` files are not parsed.
    """
    data = Path(dat_path).read_bytes()
    samples = read_wfdb_212(data, n_channels)
    annotations = tuple(Annotation(b.r_peak_index, b.label, b.qrs_duration_ms)
                        for b in sorted(beats, key=lambda b: b.r_peak_index))
    return RawRecord(record_id, sampling_rate_hz, samples.T.copy(), annotations)


# ---------------------------------------------------------------------------
# split

@dataclass(frozen=True)
class SplitSpec:
    counts: Mapping[ClassLabel, int]
    seed: int = 0


def split_indices(labels: Sequence[int] | np.ndarray, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Row indices of (train, test); training rows drawn per class without replacement.

    Classes are visited in label order and share one sampler stream.
    """
    labels = np.asarray(labels, dtype=np.int64)
    sampler = SeededSampler(spec.seed)
    train = []
    for label in ClassLabel:
        want = int(spec.counts.get(label, 0))
        if want < 0:
            raise ValueError("split counts must be non-negative")
        pool = np.flatnonzero(labels == label)
        if want > len(pool):
            raise CapacityError(label, want, len(pool))
        if want:
            train.append(pool[sampler.sample(len(pool), want)])
    train_idx = np.sort(np.concatenate(train)) if train else np.zeros(0, dtype=np.int64)
    mask = np.ones(len(labels), dtype=bool)
    mask[train_idx] = False
    return train_idx, np.flatnonzero(mask)


def build_split(samples: SampleSet, spec: SplitSpec) -> tuple[SampleSet, SampleSet]:
    train_idx, test_idx = split_indices(samples.labels, spec)
    return samples.subset(train_idx), samples.subset(test_idx)
