"""Binary-word addressing of the triadic Cantor set.

A point of the set is identified with its infinite binary digit sequence;
everything computable here depends on finitely many digits, so the working
representation is the finite truncation: a ``Word`` of level n addressing
the cylinder of all points sharing its first n digits.  Words are stored as
(integer bit pattern, level) with digit 1 in the most significant position,
which makes the separation index a single XOR plus bit-length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .streams import SplitStream


class Infinite:
    """Separation index of a word with itself: larger than every integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"

    def __gt__(self, other) -> bool:
        return isinstance(other, int)

    def __ge__(self, other) -> bool:
        return isinstance(other, (int, Infinite))

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return isinstance(other, Infinite)


INFINITE = Infinite()

SeparationIndex = Union[int, Infinite]


@dataclass(frozen=True)
class Word:
    """A finite binary word; level 0 is the empty word addressing all of C.

    `pattern` packs the digits with digit 1 as the most significant bit of a
    `level`-bit field, so prefixes are right shifts and suffixes are masks.
    """

    pattern: int
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if not 0 <= self.pattern < (1 << self.level):
            raise ValueError(f"pattern {self.pattern} does not fit in {self.level} bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Word":
        pattern = 0
        level = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError("digits must be 0 or 1")
            pattern = (pattern << 1) | b
            level += 1
        return cls(pattern, level)

    @classmethod
    def from_string(cls, text: str) -> "Word":
        """Parse the text form: '0'/'1' characters, digit 1 first; '' is level 0."""
        if any(c not in "01" for c in text):
            raise ValueError(f"invalid word string {text!r}")
        return cls(int(text, 2) if text else 0, len(text))

    def digit(self, k: int) -> int:
        """The k-th digit, 1-based."""
        if not 1 <= k <= self.level:
            raise ValueError(f"digit index {k} out of range for level {self.level}")
        return (self.pattern >> (self.level - k)) & 1

    def bits(self) -> tuple[int, ...]:
        return tuple((self.pattern >> (self.level - k)) & 1 for k in range(1, self.level + 1))

    def prefix(self, m: int) -> "Word":
        if not 0 <= m <= self.level:
            raise ValueError(f"prefix length {m} out of range for level {self.level}")
        return Word(self.pattern >> (self.level - m), m)

    def is_prefix_of(self, other: "Word") -> bool:
        return self.level <= other.level and other.prefix(self.level) == self

    def child(self, bit: int) -> "Word":
        if bit not in (0, 1):
            raise ValueError("digit must be 0 or 1")
        return Word((self.pattern << 1) | bit, self.level + 1)

    def concat(self, suffix: "Word") -> "Word":
        return Word((self.pattern << suffix.level) | suffix.pattern, self.level + suffix.level)

    def __str__(self) -> str:
        return format(self.pattern, f"0{self.level}b") if self.level else ""

    def __repr__(self) -> str:
        return f"Word('{self}')"


def separation_index(x: Word, y: Word) -> SeparationIndex:
    """First index where the digits of x and y differ; INFINITE when x == y."""
    if x.level != y.level:
        raise ValueError(f"words have different levels: {x.level} != {y.level}")
    diff = x.pattern ^ y.pattern
    if diff == 0:
        return INFINITE
    return x.level - diff.bit_length() + 1


def ultrametric_distance(x: Word, y: Word) -> float:
    """The ultrametric 3^(-separation index); 0 for equal words."""
    c = separation_index(x, y)
    if isinstance(c, Infinite):
        return 0.0
    return 3.0 ** (-c)


def similarity_shift(x: Word, v: Word) -> Word:
    """Drop the prefix v from x, realizing the similarity between [v] and C.

    Scales distances inside [v] by exactly 3^level(v).
    """
    if not v.is_prefix_of(x):
        raise ValueError(f"{v!r} is not a prefix of {x!r}")
    n = x.level - v.level
    return Word(x.pattern & ((1 << n) - 1), n)


@dataclass(frozen=True)
class Isometry:
    """An isometry of the Cantor set, stored as one swap bit per tree node.

    `swaps[m][w]` (for the level-m word with index w, m < depth) says whether
    the node exchanges its two children; every consistent bijection family
    on the first `depth` levels arises from exactly one such assignment.
    """

    depth: int
    swaps: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if len(self.swaps) != self.depth:
            raise ValueError("need one swap layer per level below depth")
        for m, layer in enumerate(self.swaps):
            if len(layer) != (1 << m):
                raise ValueError(f"swap layer {m} must have {1 << m} entries")

    def permutation(self, level: int) -> list[int]:
        """The induced permutation of level-`level` word indices."""
        if not 0 <= level <= self.depth:
            raise ValueError(f"level {level} exceeds isometry depth {self.depth}")
        return [apply_isometry(self, Word(i, level)).pattern for i in range(1 << level)]


def apply_isometry(g: Isometry, x: Word) -> Word:
    """Image of x under g; preserves the separation index of every pair."""
    if x.level > g.depth:
        raise ValueError(f"word level {x.level} exceeds isometry depth {g.depth}")
    out = 0
    for m in range(x.level):
        prefix = x.pattern >> (x.level - m)
        bit = (x.pattern >> (x.level - m - 1)) & 1
        out = (out << 1) | (bit ^ g.swaps[m][prefix])
    return Word(out, x.level)


def identity_isometry(depth: int) -> Isometry:
    return Isometry(depth, tuple(tuple(0 for _ in range(1 << m)) for m in range(depth)))


def random_isometry(depth: int, seed: int) -> Isometry:
    """Uniformly random isometry: an independent fair swap bit per node."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = SplitStream.from_seed(seed)
    layers = []
    for m in range(depth):
        layer_rng = rng.child(m)
        layers.append(tuple(layer_rng.bit() for _ in range(1 << m)))
    return Isometry(depth, tuple(layers))


def sample_bernoulli_word(level: int, rng: SplitStream) -> Word:
    """A word with independent fair digits, the level-n Bernoulli marginal."""
    if level < 0:
        raise ValueError("level must be >= 0")
    pattern = 0
    remaining = level
    while remaining > 0:
        take = min(remaining, 64)
        pattern = (pattern << take) | (rng.u64() >> (64 - take))
        remaining -= take
    return Word(pattern, level)
