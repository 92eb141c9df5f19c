"""Deterministic 64-bit random number generation.

All sampling in the pipeline goes through SplitMix64: a fixed, portable
generator built from pure 64-bit integer arithmetic, so the same seeds
produce the same draws on every platform and Python version. Floats use
the 53-bit mantissa construction ``(u64 >> 11) * 2**-53``.

Each sample gets its own seed derived from ``(master_seed, sample_index)``
with an avalanche mix, so samples can be generated in any order (or in
parallel) without affecting one another.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


def mix64(x: int) -> int:
    """SplitMix64 finalizer: bijective avalanche mix of a 64-bit value."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, sample_index: int) -> int:
    """Per-sample seed, a pure function of (master_seed, sample_index)."""
    if sample_index < 0:
        raise ValueError("sample_index must be non-negative")
    return mix64((master_seed + _GOLDEN * (sample_index + 1)) & _MASK64)


class SplitMix64:
    """Sequential SplitMix64 stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random mantissa bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform float in [lo, hi); returns lo for a degenerate range."""
        return lo + (hi - lo) * self.random()

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n); rejection sampling, no modulo bias."""
        if n <= 0:
            raise ValueError("randrange() bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def choice(self, seq: Sequence[T]) -> T:
        if len(seq) == 0:
            raise ValueError("choice() from an empty sequence")
        return seq[self.randrange(len(seq))]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices drawn uniformly without replacement from range(n).

        Partial Fisher-Yates over an index table: O(k) swaps, exactly
        uniform over ordered k-subsets.
        """
        if k < 0 or k > n:
            raise ValueError(f"cannot draw {k} distinct indices from {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.randrange(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1):
            j = i + self.randrange(len(items) - i)
            items[i], items[j] = items[j], items[i]
