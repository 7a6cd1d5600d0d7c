"""Deterministic seedable PRNG (RomuDuoJr) used for every stochastic decision.

One shared generator per campaign makes entire runs replayable bit-exactly
from the seed printed at startup.
"""

import math

MASK64 = (1 << 64) - 1

# RomuDuoJr constants: 64-bit multiplier and left-rotation amount.
ROMU_MULTIPLIER = 15241094284759029579
ROMU_ROTATION = 27

# Substituted for a zero seed so the state pair can never be all-zero.
ZERO_SEED_SUBSTITUTE = 0x9E3779B97F4A7C15

_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi


def _splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step: (new state, output). Used only for seeding."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class Rng:
    """RomuDuoJr generator. Not thread-safe; each worker owns its own."""

    __slots__ = ("seed", "_x", "_y")

    def __init__(self, seed: int):
        seed &= MASK64
        if seed == 0:
            seed = ZERO_SEED_SUBSTITUTE
        self.seed = seed
        # Expand the seed into two independent-looking state words.
        sm, self._x = _splitmix64(seed)
        _, self._y = _splitmix64(sm)
        if self._x == 0 and self._y == 0:
            self._y = ZERO_SEED_SUBSTITUTE

    @property
    def state(self) -> tuple[int, int]:
        return self._x, self._y

    def next_u64(self) -> int:
        """Advance one step and return the previous x-word."""
        x = self._x
        y = self._y
        self._x = (ROMU_MULTIPLIER * y) & MASK64
        y = (y - x) & MASK64
        self._y = ((y << ROMU_ROTATION) | (y >> (64 - ROMU_ROTATION))) & MASK64
        return x

    def below(self, bound: int) -> int:
        """Uniform value in [0, bound) via 64xN multiply-high reduction.

        Bias-free for bounds up to 2**32; exactly one next_u64 draw.
        """
        if bound < 1:
            raise ValueError("below() requires bound >= 1")
        return (self.next_u64() * bound) >> 64

    def coin(self) -> int:
        """Fair coin: 0 or 1. One draw."""
        return (self.next_u64() * 2) >> 64

    def gauss(self) -> float:
        """Standard normal via Box-Muller on exactly two next_u64 draws."""
        u1 = ((self.next_u64() >> 11) + 1) * _INV_2_53  # (0, 1]
        u2 = (self.next_u64() >> 11) * _INV_2_53  # [0, 1)
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)
