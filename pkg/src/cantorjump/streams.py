"""Counter-based splittable random streams.

Every random quantity in this package is drawn from a ``SplitStream``: a
stateless-by-construction generator whose j-th output is a pure function of
(key, j), using the SplitMix64 finalizer.  Streams split into child streams
by index, so a Monte Carlo run keyed by (seed, path index, clock level) is
reproducible draw-for-draw, independent of scheduling, and identical between
the compiled and pure-Python simulation kernels (which re-implement exactly
the arithmetic below on 64-bit unsigned integers).

Any change to these constants or formulas invalidates recorded seeds and
must be mirrored in ``_ckernels.pyx``.
"""

from __future__ import annotations

import math

_MASK64 = 0xFFFFFFFFFFFFFFFF

# Increment for successive draws within one stream.
DRAW_GAMMA = 0x9E3779B97F4A7C15
# Increment for deriving child stream keys; distinct from DRAW_GAMMA so a
# stream's outputs never coincide with its children's keys.
CHILD_GAMMA = 0xD1B54A32D192ED03


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective mixer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def child_key(key: int, index: int) -> int:
    """Key of child stream `index` (>= 0) of the stream with key `key`."""
    return mix64((key + CHILD_GAMMA * (index + 1)) & _MASK64)


def draw_u64(key: int, counter: int) -> int:
    """The `counter`-th (1-based) output of the stream with key `key`."""
    return mix64((key + DRAW_GAMMA * counter) & _MASK64)


class SplitStream:
    """A splittable random stream identified by a 64-bit key.

    Drawing advances an internal counter; ``child`` derives an independent
    stream without touching the counter, so child keys depend only on the
    parent key and the child index.
    """

    __slots__ = ("key", "_counter")

    def __init__(self, key: int):
        self.key = key & _MASK64
        self._counter = 0

    @classmethod
    def from_seed(cls, seed: int) -> "SplitStream":
        return cls(mix64(seed))

    def child(self, index: int) -> "SplitStream":
        if index < 0:
            raise ValueError("child index must be >= 0")
        return SplitStream(child_key(self.key, index))

    def u64(self) -> int:
        self._counter += 1
        return draw_u64(self.key, self._counter)

    def random(self) -> float:
        """Uniform double in (0, 1] from the top 53 bits of one draw."""
        return ((self.u64() >> 11) + 1) * 2.0**-53

    def exponential(self, rate: float) -> float:
        """Exponential variate with the given rate; +inf when rate is 0."""
        if rate <= 0.0:
            return math.inf
        return -math.log(self.random()) / rate

    def bit(self) -> int:
        return self.u64() >> 63

    def bits(self, n: int) -> tuple[int, ...]:
        """`n` independent fair bits, most significant bits of draws first."""
        out: list[int] = []
        while n > 0:
            take = min(n, 64)
            word = self.u64()
            out.extend((word >> (63 - i)) & 1 for i in range(take))
            n -= take
        return tuple(out)

    def integer(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection on 64-bit draws."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        # Rejection zone keeps the distribution exactly uniform.
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % bound)
        while True:
            x = self.u64()
            if x < limit:
                return x % bound

    def __repr__(self) -> str:
        return f"SplitStream(key=0x{self.key:016x})"
