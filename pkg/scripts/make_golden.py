"""Regenerate tests/data/excerpt212.* with wfdb as the reference encoder/decoder.

The record is a 30 s, 2-channel, 360 Hz synthetic ECG-like trace spanning the
full signed 12-bit range. Run from the repository root.
"""

from pathlib import Path

import numpy as np
import wfdb

OUT = Path("tests/data")
FS = 360
N = 30 * FS

rng = np.random.default_rng(212)
t = np.arange(N) / FS
beat = np.zeros(N)
for r in np.arange(0.4, 30, 0.8):
    beat += 900 * np.exp(-((t - r) / 0.012) ** 2) - 150 * np.exp(-((t - r - 0.25) / 0.05) ** 2)
ch0 = beat + 200 * np.sin(2 * np.pi * 0.3 * t) + rng.normal(0, 15, N)
ch1 = -0.6 * beat + rng.normal(0, 25, N)
signals = np.clip(np.round(np.column_stack([ch0, ch1])), -2048, 2047).astype(np.int64)
signals[:4] = [[-2048, 2047], [2047, -2048], [0, -1], [-1, 0]]

wfdb.wrsamp("excerpt212", fs=FS, units=["mV", "mV"], sig_name=["MLII", "V1"],
            d_signal=signals, fmt=["212", "212"], adc_gain=[200, 200], baseline=[0, 0],
            write_dir=str(OUT))
decoded = wfdb.rdrecord(str(OUT / "excerpt212"), physical=False).d_signal
assert np.array_equal(decoded, signals)
(OUT / "excerpt212.golden").write_bytes(decoded.astype("<i2").tobytes())
print(decoded.shape, decoded.min(), decoded.max())
