import math
import warnings

import numpy as np
import pytest
import pywt
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from labelguard.labels import ClassLabel
from labelguard.signals import (
    SegmentationWarning,
    default_half_window,
    estimate_qrs_duration,
    median_baseline,
    median_baseline_remove,
    preprocess,
    resample_morphology,
    segment_beats,
    wavelet_denoise,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


# -- median baseline ---------------------------------------------------------

def test_median_constant_signal():
    assert np.all(median_baseline_remove(np.full(50, 3.5), 7) == 0)


def test_median_spike_passes_through():
    x = [0, 0, 10, 0, 0]
    assert median_baseline(x, 1).tolist() == [0, 0, 0, 0, 0]
    assert median_baseline_remove(x, 1).tolist() == x


def test_median_ramp():
    out = median_baseline_remove([1, 2, 3, 4, 5], 1)
    assert out[1:-1].tolist() == [0, 0, 0]
    # replicated edges: median(1,1,2) = 1, median(4,5,5) = 5
    assert out.tolist() == [0, 0, 0, 0, 0]


def test_median_window_too_long():
    with pytest.raises(ValueError):
        median_baseline_remove(np.zeros(4), 2)
    with pytest.raises(ValueError):
        median_baseline_remove(np.zeros(4), 0)


def test_median_matches_brute_force():
    rng = np.random.default_rng(1)
    x = rng.normal(size=40)
    N = 3
    padded = np.concatenate([np.full(N, x[0]), x, np.full(N, x[-1])])
    oracle = np.array([np.median(padded[i:i + 2 * N + 1]) for i in range(len(x))])
    assert np.array_equal(median_baseline(x, N), oracle)


@settings(max_examples=50)
@given(arrays(np.float64, st.integers(7, 60), elements=st.floats(-1e3, 1e3)), st.floats(-1e3, 1e3))
def test_median_shift_equivariant(x, c):
    a = median_baseline_remove(x, 3)
    b = median_baseline_remove(x + c, 3)
    assert np.allclose(a, b, atol=1e-9)


def test_default_half_window():
    assert default_half_window(360) == 108


def test_nan_rejected():
    with pytest.raises(ValueError):
        median_baseline_remove([0.0, np.nan, 1.0], 1)


# -- wavelet denoising -------------------------------------------------------

def _analysis_matrix(n: int, levels: int, wavelet: str = "db4") -> np.ndarray:
    """Periodized orthogonal DWT as an explicit matrix, built by brute-force circular convolution.

    Row order matches a flattened [cA_L, cD_L, ..., cD_1] coefficient list.
    """
    w = pywt.Wavelet(wavelet)
    lo, hi = np.array(w.dec_lo), np.array(w.dec_hi)
    half = len(lo) // 2

    def step(m):
        a = np.zeros((m // 2, m))
        d = np.zeros((m // 2, m))
        for k in range(m // 2):
            for t in range(len(lo)):
                col = (2 * k + half - t) % m
                a[k, col] += lo[t]
                d[k, col] += hi[t]
        return a, d

    details = []
    current = np.eye(n)
    m = n
    for _ in range(levels):
        a, d = step(m)
        details.append(d @ current)
        current = a @ current
        m //= 2
    return np.vstack([current, *reversed(details)])


def _oracle_denoise(x: np.ndarray, levels: int) -> np.ndarray:
    W = _analysis_matrix(len(x), levels)
    c = W @ x
    n_approx = len(x) >> levels
    finest = c[len(x) // 2:]
    sigma = np.median(np.abs(finest)) / 0.6745
    thr = sigma * math.sqrt(2 * math.log(len(x)))
    shrunk = c.copy()
    det = shrunk[n_approx:]
    shrunk[n_approx:] = np.sign(det) * np.maximum(np.abs(det) - thr, 0)
    return W.T @ shrunk


def test_analysis_matrix_is_orthonormal():
    W = _analysis_matrix(256, 8)
    assert np.allclose(W @ W.T, np.eye(256), atol=1e-10)


def test_denoise_matches_brute_force_oracle():
    rng = np.random.default_rng(5)
    t = np.arange(1024) / 360
    x = np.sin(2 * np.pi * 1.2 * t) + 0.2 * rng.normal(size=1024)
    assert np.allclose(wavelet_denoise(x, 8), _oracle_denoise(x, 8), atol=1e-9)


def test_50hz_sine_rms_reduction():
    x = np.sin(2 * np.pi * 50 * np.arange(2048) / 360)
    rms_in = np.sqrt(np.mean(x ** 2))
    oracle = _oracle_denoise(x, 8)
    ours = wavelet_denoise(x, 8)
    assert np.allclose(ours, oracle, atol=1e-9)
    reduction = 1 - np.sqrt(np.mean(ours ** 2)) / rms_in
    assert reduction >= 0.5


def test_denoise_zero_signal():
    assert np.all(wavelet_denoise(np.zeros(512), 8) == 0)


def test_perfect_reconstruction_without_threshold():
    rng = np.random.default_rng(2)
    for n in (256, 1000, 3001):
        x = rng.normal(size=n) * 100
        y = wavelet_denoise(x, 8, threshold=False)
        assert len(y) == n
        assert np.linalg.norm(y - x) <= 1e-9 * np.linalg.norm(x)


def test_denoise_too_short():
    with pytest.raises(ValueError):
        wavelet_denoise(np.zeros(255), 8)


def test_preprocess_removes_baseline_wander():
    fs = 360
    t = np.arange(10 * fs) / fs
    beats = sum(np.exp(-((t - r) / 0.01) ** 2) for r in np.arange(0.5, 10, 0.8))
    wander = 2.0 * np.sin(2 * np.pi * 0.2 * t)
    y = preprocess(beats + wander, fs)
    assert abs(np.median(y)) < 0.05
    assert np.max(np.abs(y - beats)) < np.max(np.abs(wander))


# -- segmentation ------------------------------------------------------------

def test_segment_example():
    x = np.arange(400, dtype=float)
    segs = segment_beats(x, [100, 200, 300], [ClassLabel.N] * 3, 100)
    assert len(segs) == 1
    s = segs[0]
    assert (s.start, s.start + len(s.samples), s.r_peak_index, s.prev_rr_s) == (150, 250, 200, 1.0)
    assert s.samples[0] == 150 and s.samples[-1] == 249


def test_segment_two_peaks_warns():
    with pytest.warns(SegmentationWarning):
        assert segment_beats(np.zeros(100), [10, 50], [ClassLabel.N] * 2, 100) == []


def test_segment_equal_spacing():
    segs = segment_beats(np.zeros(1000), [100, 300, 500, 700, 900], [ClassLabel.V] * 5, 360)
    assert len(segs) == 3
    assert len({len(s.samples) for s in segs}) == 1


def test_segment_unsorted():
    with pytest.raises(ValueError):
        segment_beats(np.zeros(100), [10, 5, 50], [ClassLabel.N] * 3, 100)


@settings(max_examples=80)
@given(st.lists(st.integers(1, 60), min_size=2, max_size=30))
def test_segments_tile(gaps):
    peaks = np.cumsum([3] + gaps)
    x = np.zeros(int(peaks[-1]) + 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SegmentationWarning)
        segs = segment_beats(x, peaks, [ClassLabel.N] * len(peaks), 360)
    assert len(segs) == max(len(peaks) - 2, 0)
    if segs:
        mids = (peaks[:-1] + peaks[1:]) // 2
        assert segs[0].start == mids[0]
        assert segs[-1].start + len(segs[-1].samples) == mids[-1]
        for a, b in zip(segs, segs[1:]):
            assert a.start + len(a.samples) == b.start


# -- morphology resampling ---------------------------------------------------

def test_resample_identity():
    assert resample_morphology([1, 2, 3, 4], 4).tolist() == [1, 2, 3, 4]


def test_resample_stretch_examples():
    assert resample_morphology([0, 10], 3).tolist() == [0, 5, 10]
    assert resample_morphology([0, 1, 0], 5).tolist() == [0, 0.5, 1, 0.5, 0]


def test_resample_short_segment():
    with pytest.raises(ValueError):
        resample_morphology([1.0], 300)


def test_resample_matches_direct_formula():
    y = np.array([3.0, -1.0, 4.0, 1.0, 5.0, 9.0, 2.0])
    n = 11
    oracle = []
    for j in range(1, n + 1):
        r = (j - 1) * (len(y) - 1) / (n - 1) + 1
        lo = math.floor(r)
        hi = min(lo + 1, len(y))
        oracle.append(y[lo - 1] + (y[hi - 1] - y[lo - 1]) * (r - lo))
    assert np.allclose(resample_morphology(y, n), oracle, atol=1e-12)


@settings(max_examples=300)
@given(arrays(np.float64, st.integers(2, 400), elements=finite), st.integers(2, 600))
def test_resample_properties(y, n):
    out = resample_morphology(y, n)
    assert len(out) == n
    assert out[0] == y[0] and out[-1] == y[-1]
    tol = 1e-9 * (1 + np.max(np.abs(y)))
    assert out.min() >= y.min() - tol and out.max() <= y.max() + tol


@settings(max_examples=100)
@given(arrays(np.float64, st.integers(2, 400), elements=finite))
def test_resample_same_length_identity(y):
    assert np.array_equal(resample_morphology(y, len(y)), y)


# -- QRS duration ------------------------------------------------------------

def test_qrs_of_rectangular_pulse():
    fs = 1000
    x = np.zeros(600)
    x[280:360] = 1.0  # 80 samples = 80 ms
    assert estimate_qrs_duration(x, 300, fs) == pytest.approx(0.080)


def test_qrs_is_clamped():
    fs = 1000
    spike = np.zeros(600)
    spike[300] = 1.0
    assert estimate_qrs_duration(spike, 300, fs) == 0.040
    wide = np.zeros(1000)
    wide[300:700] = 1.0  # 400 ms, still a minority of the window
    assert estimate_qrs_duration(wide, 500, fs, 0, 1000) == 0.200
