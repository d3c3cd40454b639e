"""Deterministic random number generation.

All sampling decisions that shape on-disk artifacts (trace interleaving,
branch choices, mask selection, parameter init) run on SplitMix64, a
public, fixed-algorithm 64-bit generator (Steele, Lea & Flood's mixer, as
used by java.util.SplittableRandom). The same seed therefore reproduces
the same artifacts on any platform and any reimplementation.

Seeds for independent stages/streams are derived from one global seed with
BLAKE2b over a stable encoding of the label parts, so stages can be rerun
in isolation without sharing stream state.

Bulk per-element randomness that never leaves the process (dropout masks)
uses NumPy's PCG64 seeded from the same derivation, purely for speed.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """SplitMix64 finalizer: bijective scramble of a 64-bit word."""
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *parts: int | str) -> int:
    """Derive an independent 64-bit seed from a base seed and labels.

    BLAKE2b over the little-endian base seed plus a length-prefixed
    encoding of each part. Stable across runs and platforms.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update((seed & _MASK64).to_bytes(8, "little"))
    for part in parts:
        data = part.encode("utf-8") if isinstance(part, str) else int(part).to_bytes(8, "little", signed=True)
        h.update(len(data).to_bytes(4, "little"))
        h.update(data)
    return int.from_bytes(h.digest(), "little")


class SplitMix64:
    """Sequential SplitMix64 stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randbelow(self, n: int) -> int:
        """Unbiased uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        """Fisher-Yates shuffle in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def normal(self, mean: float = 0.0, std: float = 1.0) -> float:
        """Gaussian sample via Box-Muller (one value per pair of uniforms)."""
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        r = np.sqrt(-2.0 * np.log(u1))
        return mean + std * float(r * np.cos(2.0 * np.pi * u2))

    def normal_array(self, shape: tuple[int, ...], std: float) -> np.ndarray:
        out = np.empty(int(np.prod(shape)), dtype=np.float64)
        for i in range(out.size):
            out[i] = self.normal(0.0, std)
        return out.reshape(shape)


def numpy_generator(seed: int, *parts: int | str) -> np.random.Generator:
    """PCG64 generator for bulk in-process randomness (dropout masks)."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *parts)))
