"""ECG preprocessing, beat segmentation and morphology resampling."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pywt
from scipy.ndimage import median_filter

from labelguard.labels import ClassLabel

QRS_MIN_S = 0.040
QRS_MAX_S = 0.200


class SegmentationWarning(UserWarning):
    pass


def _as_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains NaN or infinite values")
    return x


def default_half_window(sampling_rate_hz: float) -> int:
    return int(math.floor(0.3 * sampling_rate_hz))


def median_baseline(x, half_window: int) -> np.ndarray:
    """Running median over ``2*half_window + 1`` samples, edges replicated."""
    x = _as_signal(x)
    if half_window < 1:
        raise ValueError("half_window must be positive")
    if 2 * half_window + 1 > len(x):
        raise ValueError(f"median window {2 * half_window + 1} longer than signal ({len(x)})")
    return median_filter(x, size=2 * half_window + 1, mode="nearest")


def median_baseline_remove(x, half_window: int) -> np.ndarray:
    """Subtract the running-median baseline; returns the corrected residual."""
    x = _as_signal(x)
    return x - median_baseline(x, half_window)


def wavelet_denoise(x, levels: int = 8, wavelet: str = "db4", threshold: bool = True) -> np.ndarray:
    """Soft universal-threshold wavelet shrinkage.

    The noise level is estimated from the finest detail band as
    ``median(|d1|) / 0.6745`` and every detail band is soft-thresholded at
    ``sigma * sqrt(2 ln L)``. With ``threshold=False`` the signal is only
    decomposed and reconstructed.
    """
    x = _as_signal(x)
    if levels < 1:
        raise ValueError("levels must be positive")
    if len(x) < 2 ** levels:
        raise ValueError(f"signal of length {len(x)} too short for {levels} levels")
    coeffs = pywt.wavedec(x, wavelet, mode="periodization", level=levels)
    if threshold:
        sigma = np.median(np.abs(coeffs[-1])) / 0.6745
        thr = sigma * math.sqrt(2.0 * math.log(len(x)))
        if thr > 0:
            coeffs = [coeffs[0]] + [pywt.threshold(d, thr, mode="soft") for d in coeffs[1:]]
    return pywt.waverec(coeffs, wavelet, mode="periodization")[: len(x)]


def preprocess(x, sampling_rate_hz: float, half_window: int | None = None,
               denoise: bool = True, levels: int = 8, wavelet: str = "db4") -> np.ndarray:
    """Baseline removal followed by wavelet denoising."""
    if half_window is None:
        half_window = default_half_window(sampling_rate_hz)
    y = median_baseline_remove(x, half_window)
    if denoise:
        y = wavelet_denoise(y, levels=levels, wavelet=wavelet)
    return y


@dataclass(frozen=True)
class BeatSegment:
    samples: np.ndarray
    r_peak_index: int
    start: int
    prev_rr_s: float
    label: ClassLabel | None
    record_id: str = ""
    qrs_duration_s: float | None = None


def segment_beats(x, r_peaks: Sequence[int], labels: Sequence[ClassLabel | None],
                  sampling_rate_hz: float, record_id: str = "",
                  qrs_durations_s: Sequence[float | None] | None = None) -> list[BeatSegment]:
    """Cut one segment per interior R-peak, from the previous midpoint to the next.

    The first and last peaks have no midpoint on one side and yield no segment.
    """
    x = _as_signal(x)
    peaks = np.asarray(r_peaks, dtype=np.int64)
    if len(labels) != len(peaks):
        raise ValueError("one label per R-peak required")
    if np.any(np.diff(peaks) <= 0):
        raise ValueError("R-peaks must be strictly increasing")
    if len(peaks) < 3:
        warnings.warn(f"record {record_id!r}: fewer than 3 R-peaks, no beats segmented",
                      SegmentationWarning, stacklevel=2)
        return []
    mids = (peaks[:-1] + peaks[1:]) // 2
    out = []
    for k in range(1, len(peaks) - 1):
        start, stop = int(mids[k - 1]), int(mids[k])
        qrs = None if qrs_durations_s is None else qrs_durations_s[k]
        out.append(BeatSegment(
            samples=x[start:stop],
            r_peak_index=int(peaks[k]),
            start=start,
            prev_rr_s=float(peaks[k] - peaks[k - 1]) / sampling_rate_hz,
            label=labels[k],
            record_id=record_id,
            qrs_duration_s=qrs,
        ))
    return out


def resample_morphology(y, n: int = 300) -> np.ndarray:
    """Linearly stretch or compress a segment of length n* to ``n`` points.

    Uses 1-based positions ``r_j = (j-1)(n*-1)/(n-1) + 1``; the last output
    equals the last input exactly.
    """
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n_star = len(y)
    if n_star < 2:
        raise ValueError("segment needs at least 2 samples")
    if n < 2:
        raise ValueError("output length must be at least 2")
    j = np.arange(n, dtype=np.int64)  # j - 1
    # integer numerator keeps r exact whenever it is integral
    r = (j * (n_star - 1)) / (n - 1)  # r_j - 1, zero-based
    base = np.floor(r).astype(np.int64)
    frac = r - base
    out = y[base].copy()
    inner = base < n_star - 1
    out[inner] += (y[base[inner] + 1] - y[base[inner]]) * frac[inner]
    return out


def estimate_qrs_duration(x, r_index: int, sampling_rate_hz: float, start: int | None = None,
                          stop: int | None = None) -> float:
    """QRS width in seconds around an R-peak.

    Width of the contiguous run around the peak where ``|x - local baseline|``
    exceeds 10% of the R amplitude, the baseline being the median of the
    ``[start, stop)`` window. Clamped to [40 ms, 200 ms].
    """
    x = np.asarray(x, dtype=np.float64)
    reach = int(round(QRS_MAX_S * sampling_rate_hz))
    lo = max(0, r_index - reach) if start is None else start
    hi = min(len(x), r_index + reach + 1) if stop is None else stop
    window = x[lo:hi]
    if len(window) == 0:
        return QRS_MIN_S
    baseline = np.median(window)
    dev = np.abs(window - baseline)
    peak = r_index - lo
    amp = dev[peak]
    if amp <= 0:
        return QRS_MIN_S
    above = dev > 0.1 * amp
    left = peak
    while left > 0 and above[left - 1]:
        left -= 1
    right = peak
    while right < len(window) - 1 and above[right + 1]:
        right += 1
    width = (right - left + 1) / sampling_rate_hz
    return float(min(max(width, QRS_MIN_S), QRS_MAX_S))
