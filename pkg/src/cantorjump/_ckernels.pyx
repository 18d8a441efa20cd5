# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled simulation kernels, the Cython twin of ``_pykernels``.

Implements exactly the draw protocol documented in ``_pykernels`` with the
same 64-bit unsigned arithmetic and the same libm calls in the same order,
so both lanes produce bit-identical outputs for equal inputs (the extension
is compiled with floating-point contraction disabled to keep it that way).
Any change here must be mirrored there.
"""

from libc.math cimport exp, log, nextafter
from libc.stdint cimport int64_t, uint64_t

import numpy as np

cdef double _INV53 = 2.0 ** -53
cdef double _INF = float("inf")

# SplitMix64 constants; must match streams.py.
cdef uint64_t _DRAW_GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t _CHILD_GAMMA = 0xD1B54A32D192ED03ULL

# Stack buffers in _walk hold depth + 1 entries; simulate.py caps depth at 60.
cdef int _MAX_DEPTH = 60


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _child_key(uint64_t key, uint64_t index) noexcept nogil:
    return _mix64(key + _CHILD_GAMMA * (index + 1))


cdef inline uint64_t _draw_u64(uint64_t key, uint64_t counter) noexcept nogil:
    return _mix64(key + _DRAW_GAMMA * counter)


cdef inline double _uniform(uint64_t key, uint64_t counter) noexcept nogil:
    return <double>((_draw_u64(key, counter) >> 11) + 1) * _INV53


cdef bint _walk(uint64_t x0, int depth, double horizon, const double* rates,
                uint64_t path_key, int guard_level,
                uint64_t* out_state, int64_t* level_counts) noexcept nogil:
    """Event loop without recording; mirrors _pykernels._core step for step."""
    cdef uint64_t keys[61]
    cdef uint64_t ctrs[61]
    cdef double pend[61]
    cdef int k, j, nfree
    cdef double r, u, tmin, t_last, t_rec
    cdef uint64_t state, word, suffix, high, flip
    for k in range(1, depth + 1):
        keys[k] = _child_key(path_key, <uint64_t>k)
        ctrs[k] = 0
        pend[k] = _INF
        r = rates[k]
        if r > 0.0:
            ctrs[k] = 1
            u = _uniform(keys[k], 1)
            pend[k] = -log(u) / r
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
            out_state[0] = state
            return True
        if k <= guard_level:
            out_state[0] = state
            return False
        ctrs[k] += 1
        word = _draw_u64(keys[k], ctrs[k])
        ctrs[k] += 1
        u = _uniform(keys[k], ctrs[k])
        pend[k] = tmin - log(u) / rates[k]
        t_rec = tmin if tmin > t_last else nextafter(t_last, _INF)
        if t_rec > horizon:
            out_state[0] = state
            return True
        t_last = t_rec
        nfree = depth - k
        suffix = (word >> (64 - nfree)) if nfree else 0
        high = state >> (nfree + 1)
        flip = 1 - ((state >> nfree) & 1)
        state = (((high << 1) | flip) << nfree) | suffix
        if level_counts != NULL:
            level_counts[k] += 1


cdef double[::1] _rates_view(object rates, int depth):
    arr = np.ascontiguousarray(rates, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != depth + 1:
        raise ValueError("rates must be a flat array of length depth + 1")
    return arr


cdef void _check_depth(int depth, int n) except *:
    if not 1 <= depth <= _MAX_DEPTH:
        raise ValueError(f"depth must be between 1 and {_MAX_DEPTH}")
    if not 0 <= n <= depth:
        raise ValueError("histogram resolution must be between 0 and depth")


def run_path(uint64_t x0, int depth, double horizon, rates, uint64_t path_key,
             int guard_level=0):
    """One event-resolved path.

    Returns (accepted, times, levels, states) as numpy arrays; states hold
    the full post-event bit patterns.  With guard_level > 0 the run aborts,
    accepted=False, on the first event at a level <= guard_level.
    """
    _check_depth(depth, 0)
    cdef double[::1] rv = _rates_view(rates, depth)
    times: list = []
    levels: list = []
    states: list = []
    cdef uint64_t keys[61]
    cdef uint64_t ctrs[61]
    cdef double pend[61]
    cdef int k, j, nfree
    cdef double r, u, tmin, t_last, t_rec
    cdef uint64_t state, word, suffix, high, flip
    cdef bint accepted = True
    for k in range(1, depth + 1):
        keys[k] = _child_key(path_key, <uint64_t>k)
        ctrs[k] = 0
        pend[k] = _INF
        r = rv[k]
        if r > 0.0:
            ctrs[k] = 1
            u = _uniform(keys[k], 1)
            pend[k] = -log(u) / r
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
            break
        if k <= guard_level:
            accepted = False
            break
        ctrs[k] += 1
        word = _draw_u64(keys[k], ctrs[k])
        ctrs[k] += 1
        u = _uniform(keys[k], ctrs[k])
        pend[k] = tmin - log(u) / rv[k]
        t_rec = tmin if tmin > t_last else nextafter(t_last, _INF)
        if t_rec > horizon:
            break
        t_last = t_rec
        nfree = depth - k
        suffix = (word >> (64 - nfree)) if nfree else 0
        high = state >> (nfree + 1)
        flip = 1 - ((state >> nfree) & 1)
        state = (((high << 1) | flip) << nfree) | suffix
        times.append(t_rec)
        levels.append(k)
        states.append(state)
    return (
        accepted,
        np.array(times, dtype=np.float64),
        np.array(levels, dtype=np.int64),
        np.array(states, dtype=np.int64),
    )


def batch_prefix_counts(uint64_t x0, int depth, int n, double t,
                        long long samples, rates, uint64_t master_key):
    """Histogram of the first n digits of the state at time t over paths."""
    _check_depth(depth, n)
    cdef double[::1] rv = _rates_view(rates, depth)
    counts_arr = np.zeros(1 << n, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    cdef int shift = depth - n
    cdef long long i
    cdef uint64_t state
    with nogil:
        for i in range(samples):
            _walk(x0, depth, t, &rv[0], _child_key(master_key, <uint64_t>i),
                  0, &state, NULL)
            counts[state >> shift] += 1
    return counts_arr


def batch_level_counts(uint64_t x0, int depth, double horizon,
                       long long samples, rates, uint64_t master_key):
    """Per-path, per-level event counts; column 0 is unused."""
    _check_depth(depth, 0)
    cdef double[::1] rv = _rates_view(rates, depth)
    out = np.zeros((samples, depth + 1), dtype=np.int64)
    cdef int64_t[:, ::1] rows = out
    cdef long long i
    cdef uint64_t state
    with nogil:
        for i in range(samples):
            _walk(x0, depth, horizon, &rv[0], _child_key(master_key, <uint64_t>i),
                  0, &state, &rows[i, 0])
    return out


def batch_confined_prefix_counts(uint64_t x0, int depth, int guard_level, int n,
                                 double horizon, long long want_accepted, rates,
                                 uint64_t master_key, long long attempt_budget):
    """Rejection-sampled endpoint histogram for paths confined above guard_level.

    Attempt i uses child stream i of the master key; an attempt is accepted
    when no event at a level <= guard_level fires inside the horizon.  Stops
    after want_accepted acceptances or attempt_budget attempts.  Returns
    (counts, attempts, accepted).
    """
    _check_depth(depth, n)
    cdef double[::1] rv = _rates_view(rates, depth)
    counts_arr = np.zeros(1 << n, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    cdef int shift = depth - n
    cdef long long attempts = 0
    cdef long long accepted = 0
    cdef uint64_t state
    cdef bint ok
    with nogil:
        while accepted < want_accepted and attempts < attempt_budget:
            ok = _walk(x0, depth, horizon, &rv[0],
                       _child_key(master_key, <uint64_t>attempts),
                       guard_level, &state, NULL)
            attempts += 1
            if ok:
                counts[state >> shift] += 1
                accepted += 1
    return counts_arr, attempts, accepted


def endpoint_histograms(uint64_t x0, int depth, int n, double t,
                        long long samples, rates, uint64_t master_key):
    """Exact endpoint-law sampler; O(depth) work per path.

    Same sampling scheme as the pure lane (see _pykernels for the
    derivation).  Returns (class_counts, prefix_counts).
    """
    _check_depth(depth, n)
    cdef double[::1] rv = _rates_view(rates, depth)
    class_arr = np.zeros(depth + 1, dtype=np.int64)
    prefix_arr = np.zeros(1 << n, dtype=np.int64)
    cdef int64_t[::1] class_counts = class_arr
    cdef int64_t[::1] prefix_counts = prefix_arr
    cdef int shift = depth - n
    cdef long long i
    cdef uint64_t key, state, ctr
    cdef double q, u, u2, p_none, arrival, last_low, gap
    cdef bint any_low
    cdef int k, first_diff, base, odd, digit
    with nogil:
        for i in range(samples):
            key = _child_key(master_key, <uint64_t>i)
            ctr = 0
            last_low = 0.0
            any_low = False
            state = 0
            first_diff = 0
            for k in range(1, depth + 1):
                q = rv[k]
                ctr += 1
                u = _uniform(key, ctr)
                if q > 0.0:
                    p_none = exp(-q * t)
                    arrival = (t + log(u) / q) if u > p_none else -1.0
                else:
                    arrival = -1.0
                if any_low:
                    ctr += 1
                    base = <int>(_draw_u64(key, ctr) >> 63)
                else:
                    base = <int>((x0 >> (depth - k)) & 1)
                odd = 0
                if arrival > last_low:
                    gap = arrival - last_low
                    ctr += 1
                    u2 = _uniform(key, ctr)
                    if u2 <= 0.5 * (1.0 + exp(-2.0 * q * gap)):
                        odd = 1
                digit = base ^ odd
                state = (state << 1) | <uint64_t>digit
                if first_diff == 0 and digit != <int>((x0 >> (depth - k)) & 1):
                    first_diff = k
                if arrival >= 0.0:
                    any_low = True
                    if arrival > last_low:
                        last_low = arrival
            class_counts[first_diff] += 1
            prefix_counts[state >> shift] += 1
    return class_arr, prefix_arr
