"""SplitMix64, the only source of randomness in the package.

The recurrence is small enough to restate here so seeds reproduce in any
language::

    state  <- (state + 0x9E3779B97F4A7C15) mod 2**64
    z      <- state
    z      <- ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z      <- ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    output <- z ^ (z >> 31)

The k-th output (k = 1, 2, ...) of a stream seeded with ``s`` therefore only
depends on ``s + k * GOLDEN``, which is what makes the vectorised ``block``
draw possible.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th child stream: output ``index + 1`` of the parent."""
    return mix64((seed + (index + 1) * GOLDEN) & MASK64)


def probability_threshold(p) -> int:
    """Integer threshold t with P(draw < t) = p for a uniform 64-bit draw (floored)."""
    frac = Fraction(p)
    if frac < 0 or frac > 1:
        raise ValueError(f"probability {p} outside [0, 1]")
    return (frac.numerator << 64) // frac.denominator


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, bound: int) -> int:
        """Uniform-ish integer in [0, bound) by plain reduction modulo ``bound``."""
        return self.next() % bound

    def block(self, count: int) -> np.ndarray:
        """The next ``count`` outputs as a uint64 array, identical to ``count`` calls of next()."""
        if count <= 0:
            return np.zeros(0, dtype=np.uint64)
        steps = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(self.state) + steps * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * GOLDEN) & MASK64
        return z
