"""Seedable 64-bit RNG (SplitMix64) with a portable derivation scheme.

Benchmark and test reproducibility must not depend on interpreter or
platform details, so all workload randomness goes through this generator
instead of the stdlib Mersenne Twister.  The exact update is the SplitMix64
finalizer; any implementation in any language seeded the same way produces
the same stream.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """64-bit generator: state += gamma, output = mix(state)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform int in [0, bound), as next_u64() mod bound.

        The modulo bias is at most bound / 2**64, which is irrelevant for
        the bounds used here (at most 2**31), and keeps the definition
        trivially portable.
        """
        if bound < 1:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound

    def next_float(self) -> float:
        """Uniform float in [0, 1): the top 53 bits of next_u64() / 2**53."""
        return (self.next_u64() >> 11) * (2.0 ** -53)


def spawn_seeds(seed: int, n: int) -> list[int]:
    """Derive n per-thread seeds from one root seed: the first n outputs
    of SplitMix64(seed)."""
    rng = SplitMix64(seed)
    return [rng.next_u64() for _ in range(n)]
