"""SplitMix64: the one PRNG used for every seeded draw in the package.

State update and output mixing, all arithmetic mod 2^64::

    state  = state + 0x9E3779B97F4A7C15
    z      = state
    z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z      = (z ^ (z >> 27)) * 0x94D049BB133111EB
    output = z ^ (z >> 31)

The generator is seeded with the 64-bit value of the seed.  Bounded draws use
rejection sampling on the top of the 64-bit range, so a draw below n is
exactly uniform.  Any implementation following these constants reproduces the
same point sets from the same seed.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) for 1 <= n <= 2^64."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n


def derive_seed(master: int, *path: int) -> int:
    """Child seed for (master, cell, trial, ...); independent of evaluation order."""
    s = master & MASK64
    for part in path:
        s = mix64((s + GOLDEN_GAMMA * (part + 1)) & MASK64)
    return s
