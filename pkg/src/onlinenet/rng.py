"""SplitMix64 random stream.

The stream is defined purely by 64-bit integer arithmetic so that a seed
reproduces the same sequence on every platform.  Floats take the top 53 bits
of each output word.  ``Rng.random_array`` is a vectorised view of the same
stream: ``rng.random_array(k)`` consumes exactly the values that ``k`` calls
to ``rng.random()`` would.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed; order matters."""
    h = 0x243F6A8885A308D3
    for p in parts:
        h = mix64((h ^ (int(p) & MASK64)) + GOLDEN_GAMMA)
    return h


class Rng:
    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * _INV53

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` via rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % bound

    def integers(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def coin(self, p: float = 0.5) -> bool:
        return self.random() < p

    def normal(self) -> float:
        # Box-Muller, one output per two uniforms to keep the stream simple
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def random_array(self, size: int) -> np.ndarray:
        if size <= 0:
            return np.zeros(0)
        with np.errstate(over="ignore"):
            steps = np.arange(1, size + 1, dtype=np.uint64)
            z = np.uint64(self.state) + steps * np.uint64(GOLDEN_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + size * GOLDEN_GAMMA) & MASK64
        return (z >> np.uint64(11)).astype(np.float64) * _INV53

    def uniform_array(self, size: int, a: float = 0.0, b: float = 1.0) -> np.ndarray:
        return a + (b - a) * self.random_array(size)

    def spawn(self, *tags: int) -> "Rng":
        return Rng(derive_seed(self.state, *tags))
