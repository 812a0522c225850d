"""Deterministic 64-bit PRNG (splitmix64) so generated logs are reproducible
byte for byte across runs and implementations."""

from __future__ import annotations

import math
from typing import Sequence, TypeVar

_MASK = (1 << 64) - 1

T = TypeVar("T")


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform in [0, n); rejection-free modulo is fine at our scales."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        return self.next_u64() % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform on the inclusive range [lo, hi]."""
        return lo + self.below(hi - lo + 1)

    def random(self) -> float:
        return self.next_u64() / 2**64

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.below(len(seq))]

    def chance(self, p: float) -> bool:
        return self.random() < p

    def gauss(self, mu: float, sigma: float) -> float:
        """Box-Muller transform on two uniform draws."""
        if sigma == 0:
            return mu
        u1 = (self.next_u64() + 1) / 2**64
        u2 = self.next_u64() / 2**64
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def shuffled(self, seq: Sequence[T]) -> list:
        out = list(seq)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out
