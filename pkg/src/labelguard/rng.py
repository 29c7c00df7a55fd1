"""Seeded randomness.

All sampling draws raw 64-bit words from numpy's PCG64 bit generator and
reduces them with plain rejection sampling, so a partition depends only on
the PCG64 stream and the algorithms written here, not on the internals of
``numpy.random.Generator`` methods, which may change between releases.

Sub-seeds are derived from ``(master seed, purpose tag, index)`` through
``numpy.random.SeedSequence`` with the tag hashed by CRC-32.
"""

from __future__ import annotations

import zlib

import numpy as np

_TWO_64 = 1 << 64


def derive_seed(master: int, tag: str, index: int = 0) -> int:
    """Map (master seed, purpose tag, index) to an independent 64-bit sub-seed."""
    ss = np.random.SeedSequence(
        entropy=int(master) % _TWO_64,
        spawn_key=(zlib.crc32(tag.encode("utf-8")), int(index)),
    )
    return int(ss.generate_state(1, np.uint64)[0])


class SeededSampler:
    """Unbiased integer draws, shuffles and samples from a PCG64 stream."""

    def __init__(self, seed: int):
        self.seed = int(seed) % _TWO_64
        self._bits = np.random.PCG64(self.seed)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _TWO_64 - (_TWO_64 % n)
        while True:
            word = int(self._bits.random_raw())
            if word < limit:
                return word % n

    def sample(self, n: int, k: int) -> np.ndarray:
        """``k`` distinct indices from ``range(n)`` by partial Fisher-Yates, in draw order."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} items from {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return np.asarray(pool[:k], dtype=np.int64)

    def permutation(self, n: int) -> np.ndarray:
        return self.sample(n, n)

    def numpy_generator(self) -> np.random.Generator:
        """A numpy Generator seeded from this sampler, for continuous draws."""
        return np.random.Generator(np.random.PCG64(int(self._bits.random_raw())))
