"""SplitMix64 pseudo-random generator and deterministic stream splitting.

Every random decision in the package flows from one 64-bit root seed.
Per-purpose streams are derived by XOR with a small constant and
per-sample streams by :meth:`Rng.fork`, so results never depend on
iteration order or worker count.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# per-purpose stream offsets (root seed XOR constant)
STREAM_DATASET = 1
STREAM_SHUFFLE = 2
STREAM_TRANSFORM = 3
STREAM_ATTACK = 4


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_seed(root: int, stream: int) -> int:
    return (root ^ stream) & MASK64


class Rng:
    """SplitMix64 (Steele, Lea & Flood 2014).

    >>> r = Rng(1234567)
    >>> r.next_u64()
    6457827717110365317
    """

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.state = self.seed

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def fork(self, index: int) -> "Rng":
        """Independent child stream keyed by ``index``; does not advance self."""
        return Rng(mix64(self.seed ^ mix64((index + 1) * GOLDEN_GAMMA)))

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        # rejection sampling keeps draws exactly uniform
        limit = MASK64 - (MASK64 + 1) % n
        while True:
            x = self.next_u64()
            if x <= limit:
                return x % n

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def uniform_array(self, shape, low: float, high: float) -> np.ndarray:
        """Vectorized draws; advances the state exactly as ``n`` calls to random()."""
        n = int(np.prod(shape))
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GOLDEN_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * GOLDEN_GAMMA) & MASK64
        u = (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
        return (low + (high - low) * u).reshape(shape)
