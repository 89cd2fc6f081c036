"""Portable seeded point sets.

Random points come from SplitMix64 (Steele, Lea and Flood), chosen because its
output is fully specified by a few lines of integer arithmetic and can be
reproduced bit-for-bit in any language.  A double in [0, 1) is the top 53 bits
of a 64-bit output scaled by 2^-53.
"""

from __future__ import annotations

import itertools

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53

    def uniform(self, low: float, high: float, size: int) -> np.ndarray:
        return np.array([low + (high - low) * self.next_double() for _ in range(size)])

    def substream(self) -> "SplitMix64":
        """Independent generator seeded from the next output."""
        return SplitMix64(self.next_u64())


def random_points(n: int, seed: int, dim: int, box: float = 2.0) -> np.ndarray:
    """``n`` points uniform in ``[-box, box]^dim``, drawn coordinate by coordinate."""
    rng = SplitMix64(seed)
    return np.array([rng.uniform(-box, box, dim) for _ in range(n)]).reshape(n, dim)


def grid_points(k: int, dim: int, box: float = 2.0) -> np.ndarray:
    """Tensor grid with ``k`` points per axis on ``[-box, box]^dim`` (lexicographic order)."""
    if k < 1:
        raise ValueError("grid needs at least one point per axis")
    axis = np.linspace(-box, box, k) if k > 1 else np.zeros(1)
    return np.array(list(itertools.product(axis, repeat=dim)))
