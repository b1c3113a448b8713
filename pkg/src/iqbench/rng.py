"""Deterministic random streams built on splitmix64.

Every random draw in the package comes from a :class:`Stream`, and every
stream seed is derived with :func:`derive_seed`, so a run is fully
reproducible from one master seed.  The generator name is recorded in
suite file headers; changing the algorithm is a format break.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

GENERATOR_NAME = "splitmix64"


def mix64(z: int) -> int:
    """Finalizer of splitmix64: 64-bit state -> 64-bit output."""
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Seed for sub-stream `index` of `seed`.

    Equals the index-th output of a splitmix64 sequence seeded with
    `seed`, so sub-streams are exactly the parent's output stream.
    """
    if index < 0:
        raise ValueError("sub-stream index must be >= 0")
    return mix64((seed + (index + 1) * _GAMMA) & MASK64)


class Stream:
    """A splitmix64 sequence. Single-threaded; cheap to construct."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n). Exact (rejection sampling); n == 1
        consumes no draw."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        if n == 1:
            return 0
        limit = ((1 << 64) // n) * n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n
