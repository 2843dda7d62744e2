"""Seedable 64-bit random number generator (splitmix64).

The optimizer's traces must reproduce bit-for-bit from a seed, including
across reimplementations, so the generator is pinned here instead of relying
on a library default. Algorithm: splitmix64 (Steele, Lea & Flood 2014), a
64-bit state advanced by the golden-gamma constant and finalized with two
xor-shift multiplies.
"""

from __future__ import annotations

import math

_MASK = 0xFFFFFFFFFFFFFFFF


class SplitMix64:
    """Deterministic generator over a 64-bit state."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 bits of entropy."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo bias is < 2^-40 for n < 2^24."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.randint(len(seq))]

    def gauss(self) -> float:
        """Standard normal via Box-Muller (two uniforms per call)."""
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
