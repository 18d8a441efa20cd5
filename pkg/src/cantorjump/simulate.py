"""Exact path simulation and empirical laws.

The process is simulated at a finite working depth N: one exponential clock
per level k with rate gamma * theta**k, each ring flipping digit k and
redrawing all deeper digits uniformly.  Because the level-n projection of
the depth-N simulation reproduces the depth-n simulation draw for draw, a
finite depth is not an approximation of the law at any coarser resolution;
it only truncates how deep the state is resolved.

All randomness comes from a ``SplitStream``: equal (start, horizon, params,
stream) always yields the identical path, event for event, on either
simulation backend.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend as backend
from .errors import LevelCapError, RejectionBudgetError
from .params import Params
from .streams import SplitStream, child_key
from .words import Word

# Cap on the working depth: deeper states would not fit the 64-bit patterns
# the kernels use, and level counts per path grow like sum(gamma * theta**k).
MAX_SIMULATION_DEPTH = 60


@dataclass(frozen=True)
class PathEvent:
    """One jump: at `time`, digit `level` flipped and deeper digits redrew.

    `state` is the full working-depth word right after the jump.
    """

    time: float
    level: int
    state: Word

    @property
    def resample(self) -> Word:
        """The digits below the jump level, all drawn fresh at this event."""
        free = self.state.level - self.level
        return Word(self.state.pattern & ((1 << free) - 1), free)


@dataclass(frozen=True)
class PathSample:
    """An event-resolved trajectory on [0, horizon].

    Events are strictly increasing in time; the state is right-continuous
    and equals `start` before the first event.
    """

    start: Word
    horizon: float
    params: Params
    stream_key: int
    events: tuple[PathEvent, ...]

    @property
    def depth(self) -> int:
        return self.start.level

    @cached_property
    def _times(self) -> tuple[float, ...]:
        return tuple(e.time for e in self.events)

    def state_at(self, t: float) -> Word:
        """The state at time t (right-continuous); t must lie in [0, horizon]."""
        if not 0.0 <= t <= self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        i = bisect.bisect_right(self._times, t)
        return self.start if i == 0 else self.events[i - 1].state

    def final_state(self) -> Word:
        return self.events[-1].state if self.events else self.start


def state_at(path: PathSample, t: float) -> Word:
    """The state of the path at time t; right-continuous in t."""
    return path.state_at(t)


def jump_count_by_level(path: PathSample) -> dict[int, int]:
    """Number of jumps at each clock level, including zero counts."""
    counts = dict.fromkeys(range(1, path.depth + 1), 0)
    for e in path.events:
        counts[e.level] += 1
    return counts


def _checked_rates(params: Params, depth: int) -> np.ndarray:
    if depth < 1:
        raise ValueError("working depth must be >= 1")
    if depth > MAX_SIMULATION_DEPTH:
        raise LevelCapError(
            f"working depth {depth} exceeds the simulation cap {MAX_SIMULATION_DEPTH}"
        )
    rates = np.array(params.rates(depth), dtype=np.float64)
    if not np.all(np.isfinite(rates)):
        raise ValueError(
            f"jump rates overflow at depth {depth} for theta={params.theta}"
        )
    return rates


def simulate_path(x0: Word, T: float, params: Params, rng: SplitStream) -> PathSample:
    """Simulate one path started at x0 over the horizon [0, T].

    The working depth is level(x0).  The path is a pure function of
    (x0, T, params, rng.key); the stream's counter is not consumed, so one
    stream keys exactly one path — derive children for ensembles.
    """
    if not T > 0.0:
        raise ValueError("horizon must be > 0")
    rates = _checked_rates(params, x0.level)
    depth = x0.level
    _, times, levels, states = backend.run_path(x0.pattern, depth, float(T), rates, rng.key)
    events = tuple(
        PathEvent(float(t), int(k), Word(int(s), depth))
        for t, k, s in zip(times, levels, states)
    )
    return PathSample(
        start=x0, horizon=float(T), params=params, stream_key=rng.key, events=events
    )


def _exact_frequencies(counts: np.ndarray, total: int) -> np.ndarray:
    """counts / total, with the largest entry nudged so math.fsum(...) == 1.0."""
    freq = counts.astype(np.float64) / total
    anchor = int(np.argmax(counts))
    for _ in range(4):
        gap = 1.0 - math.fsum(freq.tolist())
        if gap == 0.0:
            break
        freq[anchor] += gap
    return freq


def empirical_kernel(
    x0: Word, t: float, n: int, samples: int, params: Params, rng: SplitStream
) -> np.ndarray:
    """Monte Carlo estimate of the time-t transition law at resolution n.

    Returns frequencies over the 2**n level-n words (index = bit pattern),
    summing to exactly 1.0.  Path i uses child stream i of `rng`, so the
    estimate is a pure function of (x0, t, n, samples, params, rng.key).
    """
    if not 0 <= n <= x0.level:
        raise ValueError(f"resolution {n} must be between 0 and level(x0)={x0.level}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if t < 0.0:
        raise ValueError("time must be >= 0")
    rates = _checked_rates(params, x0.level)
    if t == 0.0:
        counts = np.zeros(1 << n, dtype=np.int64)
        counts[x0.pattern >> (x0.level - n) if n else 0] = samples
    else:
        counts = backend.batch_prefix_counts(
            x0.pattern, x0.level, n, float(t), samples, rates, rng.key
        )
    return _exact_frequencies(counts, samples)


def endpoint_kernel(
    x0: Word, t: float, n: int, samples: int, params: Params, rng: SplitStream
) -> np.ndarray:
    """Same law as `empirical_kernel`, sampled in O(depth) per path.

    Uses the per-level last-arrival decomposition instead of walking the
    event sequence, so it stays tractable when the event count over [0, t]
    is astronomical.  Realizations differ from `empirical_kernel` (different
    draws), the sampled law is identical.
    """
    if not 0 <= n <= x0.level:
        raise ValueError(f"resolution {n} must be between 0 and level(x0)={x0.level}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if t < 0.0:
        raise ValueError("time must be >= 0")
    rates = _checked_rates(params, x0.level)
    _, prefix_counts = backend.endpoint_histograms(
        x0.pattern, x0.level, n, float(t), samples, rates, rng.key
    )
    return _exact_frequencies(prefix_counts, samples)


def displacement_counts(
    x0: Word, t: float, samples: int, params: Params, rng: SplitStream
) -> np.ndarray:
    """Histogram of the separation index between start and time-t state.

    Entry c >= 1 counts endpoints first differing from x0 at digit c; entry 0
    counts endpoints equal to x0 down to the working depth (distance below
    3**-depth).  Sampled with the O(depth) endpoint sampler.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if t < 0.0:
        raise ValueError("time must be >= 0")
    rates = _checked_rates(params, x0.level)
    class_counts, _ = backend.endpoint_histograms(
        x0.pattern, x0.level, 0, float(t), samples, rates, rng.key
    )
    return class_counts


def acceptance_probability(v: Word, T: float, params: Params) -> float:
    """Probability that no clock at level <= level(v) rings in [0, T]."""
    return math.exp(-T * math.fsum(params.rates(v.level)[1:]))


def default_rejection_budget(v: Word, T: float, params: Params) -> int:
    """Default attempt budget: 100 times the expected attempts per acceptance."""
    p = acceptance_probability(v, T, params)
    if p > 0.0:
        budget = 100.0 / p
        if budget <= 1e15:
            return math.ceil(budget)
    raise RejectionBudgetError(
        f"confinement to {v!r} over horizon {T} has acceptance probability "
        f"{p:.3e}; no realistic attempt budget suffices",
        acceptance_probability=p,
        attempts=0,
    )


def simulate_confined(
    x0: Word,
    v: Word,
    T: float,
    params: Params,
    rng: SplitStream,
    max_attempts: int | None = None,
) -> PathSample:
    """Simulate a path conditioned to stay in the cylinder [v] through [0, T].

    Rejection sampling: attempt i runs child stream i of `rng` and is
    accepted when no clock at level <= level(v) rings before T (clocks above
    level(v) never leave [v]).  Raises RejectionBudgetError after
    `max_attempts` failures (default: 100 / acceptance probability).
    """
    if not v.is_prefix_of(x0):
        raise ValueError(f"start {x0!r} does not lie in the cylinder of {v!r}")
    if not T > 0.0:
        raise ValueError("horizon must be > 0")
    rates = _checked_rates(params, x0.level)
    depth = x0.level
    if max_attempts is None:
        max_attempts = default_rejection_budget(v, T, params)
    if max_attempts < 1:
        raise ValueError("attempt budget must be >= 1")
    for attempt in range(max_attempts):
        path_key = child_key(rng.key, attempt)
        accepted, times, levels, states = backend.run_path(
            x0.pattern, depth, float(T), rates, path_key, guard_level=v.level
        )
        if accepted:
            events = tuple(
                PathEvent(float(t), int(k), Word(int(s), depth))
                for t, k, s in zip(times, levels, states)
            )
            return PathSample(
                start=x0,
                horizon=float(T),
                params=params,
                stream_key=path_key,
                events=events,
            )
    raise RejectionBudgetError(
        f"no path stayed in {v!r} within {max_attempts} attempts "
        f"(acceptance probability {acceptance_probability(v, T, params):.3e})",
        acceptance_probability=acceptance_probability(v, T, params),
        attempts=max_attempts,
    )


def confined_empirical_kernel(
    x0: Word,
    v: Word,
    t: float,
    resolution: int,
    accepted_samples: int,
    params: Params,
    rng: SplitStream,
    attempt_budget: int | None = None,
) -> tuple[np.ndarray, int, int]:
    """Endpoint frequencies of the confined process over the cells inside [v].

    Returns (frequencies over the 2**(resolution - level(v)) level-
    `resolution` words with prefix v, attempts, accepted).  Raises
    RejectionBudgetError if the budget ran out before `accepted_samples`
    acceptances.
    """
    if not v.is_prefix_of(x0):
        raise ValueError(f"start {x0!r} does not lie in the cylinder of {v!r}")
    if not v.level <= resolution <= x0.level:
        raise ValueError("resolution must lie between level(v) and level(x0)")
    if accepted_samples < 1:
        raise ValueError("accepted_samples must be >= 1")
    if t < 0.0:
        raise ValueError("time must be >= 0")
    rates = _checked_rates(params, x0.level)
    if attempt_budget is None:
        p = acceptance_probability(v, t, params)
        if p <= 0.0 or 100.0 * accepted_samples / p > 1e15:
            raise RejectionBudgetError(
                f"confinement to {v!r} over horizon {t} has acceptance "
                f"probability {p:.3e}; no realistic attempt budget suffices",
                acceptance_probability=p,
                attempts=0,
            )
        attempt_budget = math.ceil(100.0 * accepted_samples / p)
    counts, attempts, accepted = backend.batch_confined_prefix_counts(
        x0.pattern,
        x0.level,
        v.level,
        resolution,
        float(t),
        accepted_samples,
        rates,
        rng.key,
        attempt_budget,
    )
    if accepted < accepted_samples:
        raise RejectionBudgetError(
            f"only {accepted} of {accepted_samples} paths stayed in {v!r} "
            f"within {attempts} attempts",
            acceptance_probability=acceptance_probability(v, t, params),
            attempts=attempts,
        )
    inner = resolution - v.level
    lo = v.pattern << inner
    block = counts[lo : lo + (1 << inner)]
    return _exact_frequencies(block, accepted), attempts, accepted
