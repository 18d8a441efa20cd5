"""Process parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Params:
    """Parameters (gamma, theta) of the self-similar jump process.

    gamma rescales time uniformly; theta is the essential self-similarity
    parameter.  The level-k jump rate is gamma * theta**k.  Both parameters
    may be 0, giving the constant process.
    """

    gamma: float
    theta: float

    def __post_init__(self):
        for name in ("gamma", "theta"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be a finite nonnegative number, got {value!r}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def is_degenerate(self) -> bool:
        """True when every jump rate vanishes and the process is constant."""
        return self.gamma == 0.0 or self.theta == 0.0

    def rate(self, k: int) -> float:
        """Jump rate gamma * theta**k at level k >= 1."""
        if k < 1:
            raise ValueError(f"level must be >= 1, got {k}")
        return self.gamma * self.theta**k

    def rates(self, n: int) -> list[float]:
        """Rates for levels 1..n as a list indexed 0..n (index 0 unused, 0.0)."""
        out = [0.0] * (n + 1)
        acc = 1.0
        for k in range(1, n + 1):
            acc *= self.theta
            out[k] = self.gamma * acc
        return out

    def total_rate(self, n: int) -> float:
        """Total jump intensity gamma * sum(theta**k, k=1..n) of the level-n chain."""
        return math.fsum(self.rates(n)[1:])
