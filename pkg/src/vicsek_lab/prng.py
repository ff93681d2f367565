"""Portable deterministic pseudo-randomness for seeded test suites.

SplitMix64 (Steele, Lea, Flood 2014): state advances by the golden-gamma
increment and the output is a bijective finalizer of the state.  The
generator is fixed here, independent of Python's random module, so seeded
golden values are portable across platforms and Python versions.
"""

from __future__ import annotations

from fractions import Fraction

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_uint64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (n small)."""
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_uint64()
            if x < limit:
                return x % n

    def next_unit_fraction(self, bits: int = 20) -> Fraction:
        """Dyadic rational in [-1, 1), exactly representable as a float."""
        k = self.next_uint64() >> (64 - bits)
        return Fraction(k, 1 << (bits - 1)) - 1
