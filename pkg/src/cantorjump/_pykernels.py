"""Pure-Python simulation kernels.

The compiled twin ``_ckernels.pyx`` implements exactly the same draw protocol
with the same 64-bit arithmetic and libm calls; both lanes must produce
bit-identical outputs for equal inputs.  Any change here must be mirrored
there.

Draw protocol, per path key:

Event simulation: clock level k draws from child stream k of the path
stream.  From that stream, in order: one uniform for the first arrival gap,
then per event one raw 64-bit word (its top depth-k bits resample the deeper
digits) followed by one uniform for the next arrival gap.  The merged event
takes the lowest pending level on exact ties; a recorded time that collides
with the previous record is nudged one ulp upward, and an event nudged past
the horizon is dropped.  Because each level consumes its own stream at a
rate independent of the simulation depth, truncating the depth reproduces
the shallower simulation draw-for-draw.

Endpoint sampling: the path stream itself is consumed level by level; per
level one uniform decides the last level-k arrival (none, or its time by
inversion), then, only when some lower level has fired, one raw word's top
bit refreshes the digit, then, only when the last level-k arrival beats the
last lower-level event, one uniform decides the flip parity.
"""

from __future__ import annotations

import math

import numpy as np

from .streams import child_key, draw_u64

_INV53 = 2.0**-53
_INF = math.inf


def _core(x0, depth, horizon, rates, path_key, guard_level, times, levels, states, level_counts):
    """Shared event loop.  Appends to the optional list/array sinks.

    Returns (accepted, final_state).  `accepted` goes False as soon as an
    event at level <= guard_level fires inside the horizon, in which case the
    run stops early.
    """
    keys = [0] * (depth + 1)
    ctrs = [0] * (depth + 1)
    pend = [_INF] * (depth + 1)
    for k in range(1, depth + 1):
        keys[k] = child_key(path_key, k)
        r = rates[k]
        if r > 0.0:
            ctrs[k] = 1
            u = ((draw_u64(keys[k], 1) >> 11) + 1) * _INV53
            pend[k] = -math.log(u) / r
    state = x0
    t_last = 0.0
    while True:
        k = 1
        tmin = pend[1]
        for j in range(2, depth + 1):
            if pend[j] < tmin:
                tmin = pend[j]
                k = j
        if tmin > horizon:
            return True, state
        if k <= guard_level:
            return False, state
        ctrs[k] += 1
        word = draw_u64(keys[k], ctrs[k])
        ctrs[k] += 1
        u = ((draw_u64(keys[k], ctrs[k]) >> 11) + 1) * _INV53
        pend[k] = tmin - math.log(u) / rates[k]
        t_rec = tmin if tmin > t_last else math.nextafter(t_last, _INF)
        if t_rec > horizon:
            return True, state
        t_last = t_rec
        nfree = depth - k
        suffix = word >> (64 - nfree) if nfree else 0
        high = state >> (nfree + 1)
        flip = 1 - ((state >> nfree) & 1)
        state = (((high << 1) | flip) << nfree) | suffix
        if times is not None:
            times.append(t_rec)
            levels.append(k)
            states.append(state)
        if level_counts is not None:
            level_counts[k] += 1


def run_path(x0, depth, horizon, rates, path_key, guard_level=0):
    """One event-resolved path.

    Returns (accepted, times, levels, states) as numpy arrays; states hold
    the full post-event bit patterns.  With guard_level > 0 the run aborts,
    accepted=False, on the first event at a level <= guard_level.
    """
    times: list[float] = []
    levels: list[int] = []
    states: list[int] = []
    rl = [float(r) for r in rates]
    accepted, _ = _core(x0, depth, horizon, rl, path_key, guard_level, times, levels, states, None)
    return (
        accepted,
        np.array(times, dtype=np.float64),
        np.array(levels, dtype=np.int64),
        np.array(states, dtype=np.int64),
    )


def batch_prefix_counts(x0, depth, n, t, samples, rates, master_key):
    """Histogram of the first n digits of the state at time t over paths."""
    counts = np.zeros(1 << n, dtype=np.int64)
    shift = depth - n
    rl = [float(r) for r in rates]
    for i in range(samples):
        _, state = _core(x0, depth, t, rl, child_key(master_key, i), 0, None, None, None, None)
        counts[state >> shift] += 1
    return counts


def batch_level_counts(x0, depth, horizon, samples, rates, master_key):
    """Per-path, per-level event counts; column 0 is unused."""
    out = np.zeros((samples, depth + 1), dtype=np.int64)
    rl = [float(r) for r in rates]
    for i in range(samples):
        row = out[i]
        _core(x0, depth, horizon, rl, child_key(master_key, i), 0, None, None, None, row)
    return out


def batch_confined_prefix_counts(
    x0, depth, guard_level, n, horizon, want_accepted, rates, master_key, attempt_budget
):
    """Rejection-sampled endpoint histogram for paths confined above guard_level.

    Attempt i uses child stream i of the master key; an attempt is accepted
    when no event at a level <= guard_level fires inside the horizon.  Stops
    after want_accepted acceptances or attempt_budget attempts.  Returns
    (counts, attempts, accepted).
    """
    counts = np.zeros(1 << n, dtype=np.int64)
    shift = depth - n
    rl = [float(r) for r in rates]
    attempts = 0
    accepted = 0
    while accepted < want_accepted and attempts < attempt_budget:
        ok, state = _core(
            x0, depth, horizon, rl, child_key(master_key, attempts), guard_level, None, None, None, None
        )
        attempts += 1
        if ok:
            counts[state >> shift] += 1
            accepted += 1
    return counts, attempts, accepted


def endpoint_histograms(x0, depth, n, t, samples, rates, master_key):
    """Exact endpoint-law sampler; O(depth) work per path.

    Uses the per-level decomposition of the dynamics: the digit at level k
    equals its value right after the last lower-level event (a fresh fair bit
    if any such event happened, the start digit otherwise) flipped once per
    level-k arrival afterwards.  Given the last level-k arrival time L, the
    number of flips after the last lower-level event at A < L is 1 plus a
    Poisson count on (A, L), whose parity is odd with probability
    (1 + exp(-2 q_k (L - A))) / 2; with L <= A there are no flips.  The last
    arrival itself comes from one uniform by inversion.  This samples the
    time-t state law exactly without walking the event sequence, which is
    what makes deep, high-rate configurations tractable.

    Returns (class_counts, prefix_counts): class_counts[c] counts paths whose
    endpoint first differs from the start at digit c (index 0 = identical
    down to `depth`); prefix_counts histograms the first n digits.
    """
    class_counts = np.zeros(depth + 1, dtype=np.int64)
    prefix_counts = np.zeros(1 << n, dtype=np.int64)
    shift = depth - n
    rl = [float(r) for r in rates]
    for i in range(samples):
        key = child_key(master_key, i)
        ctr = 0
        last_low = 0.0
        any_low = False
        state = 0
        first_diff = 0
        for k in range(1, depth + 1):
            q = rl[k]
            ctr += 1
            u = ((draw_u64(key, ctr) >> 11) + 1) * _INV53
            if q > 0.0:
                p_none = math.exp(-q * t)
                arrival = t + math.log(u) / q if u > p_none else -1.0
            else:
                arrival = -1.0
            if any_low:
                ctr += 1
                base = draw_u64(key, ctr) >> 63
            else:
                base = (x0 >> (depth - k)) & 1
            odd = 0
            if arrival > last_low:
                gap = arrival - last_low
                ctr += 1
                u2 = ((draw_u64(key, ctr) >> 11) + 1) * _INV53
                if u2 <= 0.5 * (1.0 + math.exp(-2.0 * q * gap)):
                    odd = 1
            digit = base ^ odd
            state = (state << 1) | digit
            if first_diff == 0 and digit != (x0 >> (depth - k)) & 1:
                first_diff = k
            if arrival >= 0.0:
                any_low = True
                if arrival > last_low:
                    last_low = arrival
        class_counts[first_diff] += 1
        prefix_counts[state >> shift] += 1
    return class_counts, prefix_counts
