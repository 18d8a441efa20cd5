"""Mixing curves, displacement moments, and scaling exponents.

Total-variation distances to the invariant Bernoulli measure come straight
from the spectral kernel's class structure, so a full mixing curve at level
n costs O(n) per time point, not O(4**n).  Displacement moments are summed
over separation classes with a certified geometric tail; the scaling
exponent is fitted on the analytic series because the fractional-regime
moments at t ~ 1e-5 sit far below Monte Carlo resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .generator import ball_transition_probability, eigenvalues, kernel_deviations
from .params import Params
from .simulate import displacement_counts
from .streams import SplitStream
from .words import Word

# Dense mixing reports stop here; the per-level cost is tiny but the report
# is meant for human-sized tables.
MAX_MIXING_LEVEL = 10

_DEFAULT_MOMENT_TOL = 1e-12
# Refuse scaling fits closer to the critical surface 3**r == theta than this.
_CRITICAL_MARGIN = 1e-9
# Cap on the series length moment_truncation will accept.
_MAX_TRUNCATION = 100_000


def tv_to_uniform(n: int, t: float, params: Params) -> float:
    """Total-variation distance of the time-t law at resolution n from uniform.

    Start-independent: every row of the level-n kernel has the same sorted
    deviation profile because the class of a cell pair depends only on the
    separation index.  Computed as half the sum of |deviation| over the
    2**(n-c) cells in each separation class c plus the diagonal cell.
    """
    if n < 1:
        raise ValueError("resolution must be >= 1")
    if not t >= 0.0:
        raise ValueError("time must be >= 0")
    dev = kernel_deviations(n, t, params)
    terms = [2.0 ** (n - c) * abs(dev[c]) for c in range(1, n + 1)]
    terms.append(abs(dev[n + 1]))
    return 0.5 * math.fsum(terms)


def mixing_bound(t: float, params: Params) -> float:
    """The proven envelope 1.5 * exp(-gamma * theta * t) on the full-space TV."""
    return 1.5 * math.exp(-params.gamma * params.theta * t)


def level_one_residual(t: float, params: Params) -> tuple[float, float]:
    """Max residual of the two-term level-1 mixing decomposition and its bound.

    The level-1 law splits as uniform plus explicit multiples of
    exp(-2*gamma*theta*t) plus a leftover beta(t) carried by the no-jump
    event, so beta lies in [0, exp(-gamma*theta*t)] — and at level 1 the
    decomposition is tight: the leftover on the starting cell equals the
    bound exactly and on the flipped cell vanishes.  Returns (max residual
    over the two cells, bound).
    """
    if not t >= 0.0:
        raise ValueError("time must be >= 0")
    rate = params.gamma * params.theta
    dev = kernel_deviations(1, t, params)
    p_keep = 0.5 + dev[2]
    p_flip = 0.5 + dev[1]
    decay2 = math.exp(-2.0 * rate * t)
    bound = math.exp(-rate * t)
    beta_keep = math.fsum([p_keep, -0.5, -0.5 * decay2, bound])
    beta_flip = math.fsum([p_flip, -0.5, 0.5 * decay2])
    return max(beta_keep, beta_flip), bound


@dataclass(frozen=True)
class MixingCurve:
    """TV-to-uniform against time at one resolution."""

    level: int
    points: tuple[tuple[float, float], ...]  # (t, tv)


@dataclass(frozen=True)
class MixingReport:
    """Mixing curves for n = 1..n_max with the proven envelope applied.

    `violations` lists every (n, t, tv, bound) with tv > bound — empty when
    the envelope holds, which is the property being certified.  `residuals`
    holds (t, beta, bound) for the level-1 decomposition leftover.
    """

    params: Params
    curves: tuple[MixingCurve, ...]
    violations: tuple[tuple[int, float, float, float], ...]
    residuals: tuple[tuple[float, float, float], ...]

    def bound(self, t: float) -> float:
        return mixing_bound(t, self.params)

    @property
    def passed(self) -> bool:
        return not self.violations


def mixing_report(params: Params, n_max: int, t_grid) -> MixingReport:
    """Mixing curves for n = 1..n_max over t_grid, checked against the bound."""
    if not 1 <= n_max <= MAX_MIXING_LEVEL:
        raise ValueError(f"n_max must be between 1 and {MAX_MIXING_LEVEL}")
    times = [float(t) for t in t_grid]
    if not times:
        raise ValueError("t_grid must be non-empty")
    if any(t < 0.0 for t in times):
        raise ValueError("times must be >= 0")
    curves = []
    violations = []
    for n in range(1, n_max + 1):
        points = []
        for t in times:
            tv = tv_to_uniform(n, t, params)
            points.append((t, tv))
            bound = mixing_bound(t, params)
            if tv > bound:
                violations.append((n, t, tv, bound))
        curves.append(MixingCurve(level=n, points=tuple(points)))
    residuals = tuple(
        (t, *level_one_residual(t, params)) for t in times
    )
    return MixingReport(
        params=params,
        curves=tuple(curves),
        violations=tuple(violations),
        residuals=residuals,
    )


def moment_truncation(r: float, tol: float = _DEFAULT_MOMENT_TOL) -> tuple[int, float]:
    """Series cutoff K and its certified tail bound for the moment sum.

    Each term is at most the invariant-measure tail 3**(-r*k), so truncating
    at K drops at most 3**(-r*K) * 3**(-r) / (1 - 3**(-r)) regardless of t.
    Returns the smallest K with that bound below tol.
    """
    if not r > 0.0:
        raise ValueError("moment order must be > 0")
    if not tol > 0.0:
        raise ValueError("tolerance must be > 0")
    q = 3.0**-r
    K = 1
    while q ** (K + 1) / (1.0 - q) >= tol:
        K += 1
        if K > _MAX_TRUNCATION:
            raise ValueError(
                f"moment series needs more than {_MAX_TRUNCATION} terms for "
                f"r={r}, tol={tol}"
            )
    return K, q ** (K + 1) / (1.0 - q)


def moment_analytic(
    r: float, t: float, params: Params, tol: float = _DEFAULT_MOMENT_TOL
) -> float:
    """E[d(start, state at t)^r]: the expected displacement moment.

    Sum over separation classes: sum_k 3**(-r*k) * P(first difference at
    digit k), truncated at K from `moment_truncation` with certified tail
    below tol.  Exactly 0 at t = 0.
    """
    if not t >= 0.0:
        raise ValueError("time must be >= 0")
    K, _ = moment_truncation(r, tol)
    lam = eigenvalues(K, params)
    terms = []
    for k in range(1, K + 1):
        # Class-k probability from the precomputed eigenvalue list; same
        # closed form as ball_transition_probability(k, t, params).
        inner = [2.0**-k]
        inner += [2.0 ** (i - k) * math.exp(lam[i + 1] * t) for i in range(k - 1)]
        inner.append(-0.5 * math.exp(lam[k] * t))
        terms.append(3.0 ** (-r * k) * math.fsum(inner))
    return math.fsum(terms)


def moment_limit(r: float) -> float:
    """The t -> infinity moment: sum_k 3**(-r*k) * 2**-k = x/(1-x), x = 3**-r / 2."""
    if not r > 0.0:
        raise ValueError("moment order must be > 0")
    x = 3.0**-r / 2.0
    return x / (1.0 - x)


def moment_growth_rate(r: float, params: Params) -> float:
    """The t=0 moment growth rate sum_k 3**(-r*k) * gamma * theta**k.

    Geometric series with ratio theta / 3**r; converges exactly when
    3**r > theta (the linear-growth regime) and raises otherwise, since a
    divergent rate is how the sublinear regime announces itself.
    """
    if not r > 0.0:
        raise ValueError("moment order must be > 0")
    ratio = params.theta / 3.0**r
    if ratio >= 1.0:
        raise ValueError(
            f"growth-rate series diverges: theta={params.theta} >= 3**r={3.0**r}"
        )
    return params.gamma * ratio / (1.0 - ratio)


@dataclass(frozen=True)
class MomentCurve:
    """Analytic displacement moment against time, with certified truncation."""

    r: float
    points: tuple[tuple[float, float], ...]  # (t, M_r(t))
    truncation: int
    tail_bound: float


def moment_curve(
    r: float, t_grid, params: Params, tol: float = _DEFAULT_MOMENT_TOL
) -> MomentCurve:
    """Moment values over a time grid as a MomentCurve."""
    times = [float(t) for t in t_grid]
    if not times:
        raise ValueError("t_grid must be non-empty")
    K, tail = moment_truncation(r, tol)
    points = tuple((t, moment_analytic(r, t, params, tol)) for t in times)
    return MomentCurve(r=r, points=points, truncation=K, tail_bound=tail)


def moment_empirical(
    r: float, t: float, depth: int, samples: int, params: Params, rng: SplitStream
) -> float:
    """Monte Carlo displacement moment from `samples` paths started at zeros.

    Sample mean of d(start, state at t)**r at working depth `depth`; the law
    is start-independent by isometry invariance.  Displacements below
    3**-depth are recorded as 0, so the estimate carries a downward
    truncation bias of at most 3**(-r*depth) / (1 - 3**-r) on top of the
    sampling error.
    """
    mean, _ = moment_empirical_stats(r, t, depth, samples, params, rng)
    return mean


def moment_empirical_stats(
    r: float, t: float, depth: int, samples: int, params: Params, rng: SplitStream
) -> tuple[float, float]:
    """(sample mean, standard error) of the empirical displacement moment."""
    if not r > 0.0:
        raise ValueError("moment order must be > 0")
    counts = displacement_counts(Word(0, depth), t, samples, params, rng)
    values = [0.0] + [3.0 ** (-r * c) for c in range(1, depth + 1)]
    mean = math.fsum(counts[c] * values[c] for c in range(depth + 1)) / samples
    if samples < 2:
        return mean, math.inf
    m2 = math.fsum(counts[c] * values[c] ** 2 for c in range(depth + 1)) / samples
    var = max(0.0, (m2 - mean * mean) * samples / (samples - 1))
    return mean, math.sqrt(var / samples)


def scaling_expected_slope(r: float, params: Params) -> float:
    """The theoretical small-t growth exponent of M_r: 1 or (ln3/ln theta)*r."""
    if not r > 0.0:
        raise ValueError("moment order must be > 0")
    if params.is_degenerate:
        raise ValueError("scaling exponent undefined for the constant process")
    if 3.0**r > params.theta:
        return 1.0
    return r * math.log(3.0) / math.log(params.theta)


def scaling_regime(r: float, params: Params) -> str:
    """'linear' when 3**r > theta, 'fractional' when 3**r < theta."""
    return "linear" if 3.0**r > params.theta else "fractional"


def scaling_exponent(
    r: float, params: Params, t_lo: float, t_hi: float, points: int
) -> float:
    """Least-squares slope of log M_r(t) against log t on a log-spaced grid.

    Refuses the critical surface |3**r - theta| <= 1e-9, where the growth
    carries a logarithmic correction and no pure power law exists.
    """
    if not r > 0.0:
        raise ValueError("moment order must be > 0")
    if not 0.0 < t_lo < t_hi:
        raise ValueError("need 0 < t_lo < t_hi")
    if points < 2:
        raise ValueError("need at least two grid points")
    if params.is_degenerate:
        raise ValueError("scaling exponent undefined for the constant process")
    if abs(3.0**r - params.theta) <= _CRITICAL_MARGIN:
        raise ValueError(
            f"critical case 3**r == theta (r={r}, theta={params.theta}): the "
            "moment picks up a logarithmic factor and has no power-law slope"
        )
    ts = np.geomspace(t_lo, t_hi, points)
    # Tail tolerance well below the smallest moment on the grid.
    m_lo = moment_analytic(r, t_lo, params)
    tol = max(min(_DEFAULT_MOMENT_TOL, m_lo * 1e-6), 1e-300)
    ys = [moment_analytic(r, float(t), params, tol) for t in ts]
    if any(y <= 0.0 for y in ys):
        raise ValueError("moment vanished on the grid; cannot fit a log-log slope")
    slope = np.polyfit(np.log(ts), np.log(ys), 1)[0]
    return float(slope)


def scaling_report(
    r: float, params: Params, t_lo: float, t_hi: float, points: int
) -> dict:
    """Fitted against theoretical small-t exponent, as a plain dict."""
    return {
        "r": r,
        "gamma": params.gamma,
        "theta": params.theta,
        "slope": scaling_exponent(r, params, t_lo, t_hi, points),
        "expected": scaling_expected_slope(r, params),
        "regime": scaling_regime(r, params),
    }
