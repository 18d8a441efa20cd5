"""Rate matrices, Haar spectral structure, and transition kernels.

The process jumps between level-n cylinder cells with rates that depend only
on the separation index of the two cells.  Every finite-level rate matrix is
therefore symmetric with constant diagonal and is diagonalized exactly by the
Haar system on the binary tree, which gives a closed-form transition kernel.
The closed form is cross-checked against a structurally independent matrix
exponential (uniformization, a Poisson-weighted power series).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import LevelCapError
from .params import Params
from .words import INFINITE, Word, separation_index

# Dense 2^n x 2^n matrices are the binding memory cost; level 12 is 4096^2.
MAX_DENSE_LEVEL = 12
# Uniformization multiplies dense matrices many times; keep the oracle small.
ORACLE_MAX_LEVEL = 8
# Single rows are cheap; this only guards against absurd allocations.
MAX_ROW_LEVEL = 24

_SERIES_TAIL = 1e-14
_SEGMENT_MEAN = 32.0


def jump_rate_level(k: int, params: Params) -> float:
    """Rate gamma * theta**k of the level-k clock, k >= 1."""
    return params.rate(k)


def jump_rate(x: Word, v: Word, params: Params) -> float:
    """Rate at which the process started in the cell of x enters [v].

    x must lie outside [v]; the rate is 2**(c-n) * gamma * theta**c where
    n = level(v) and c = separation_index(prefix(x, n), v).  Splitting [v]
    into its two children halves the rate, which is the consistency that
    makes the family of finite-level chains projective.
    """
    n = v.level
    if n < 1:
        raise ValueError("target cylinder must have level >= 1")
    if x.level < n:
        raise ValueError(f"x has level {x.level} < level(v) = {n}")
    head = x.prefix(n)
    if head == v:
        raise ValueError("x lies inside [v]; the jump rate into the own cell is undefined")
    c = separation_index(head, v)
    return params.gamma * params.theta**c * 2.0 ** (c - n)


def _class_matrix(n: int) -> np.ndarray:
    """Separation classes of all level-n cell pairs.

    Entry (i, j) is c(u_i, u_j) in 1..n for i != j and the marker n+1 on the
    diagonal, so a length-(n+2) lookup table indexed by class covers every
    entry of a class function.  The separation index is n - bit_length(i^j) + 1
    and frexp exponents give exact bit lengths for integers below 2**53.
    """
    idx = np.arange(1 << n, dtype=np.int64)
    xor = (idx[:, None] ^ idx[None, :]).astype(np.float64)
    _, exp = np.frexp(xor)
    return (n + 1) - exp.astype(np.int64)


@dataclass(frozen=True)
class GeneratorMatrix:
    """Dense rate matrix of the level-n projected chain."""

    level: int
    params: Params
    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)


def build_generator(n: int, params: Params) -> GeneratorMatrix:
    """Assemble the 2^n x 2^n rate matrix.

    Off-diagonal entries are gamma * theta**c * 2**(c-n) by separation class
    c; the diagonal is the negated total rate, making row sums zero.  Entries
    within one class are bit-identical floats (single shared table value), so
    isometries, which preserve separation, conjugate the matrix exactly.
    """
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    if n > MAX_DENSE_LEVEL:
        raise LevelCapError(f"level {n} exceeds the dense-matrix cap {MAX_DENSE_LEVEL}")
    table = np.empty(n + 2)
    table[0] = np.nan
    table[n + 1] = -params.total_rate(n)
    for c in range(1, n + 1):
        table[c] = params.gamma * params.theta**c * 2.0 ** (c - n)
    return GeneratorMatrix(level=n, params=params, entries=table[_class_matrix(n)])


def apply_generator_cylindric(
    h: Callable[[Word], float], x: Word, n: int, params: Params
) -> float:
    """Generator applied to a function of the first n digits, evaluated at x.

    Computes gamma * sum over k of theta**k * (mean of h over the cells at
    separation exactly k from x, minus h at the cell of x).  Matches the
    matrix action of build_generator(n) on h as a vector.
    """
    if x.level < n:
        raise ValueError(f"x has level {x.level} < n = {n}")
    base = x.prefix(n)
    hx = h(base)
    contributions = []
    for k in range(1, n + 1):
        free = n - k
        stem = (base.prefix(k - 1).pattern << 1) | (1 - base.digit(k))
        values = [h(Word((stem << free) | suffix, n)) for suffix in range(1 << free)]
        mean = math.fsum(values) * 2.0**-free
        contributions.append(params.theta**k * (mean - hx))
    return params.gamma * math.fsum(contributions)


def eigenvalues(n: int, params: Params) -> list[float]:
    """Eigenvalues lambda_0..lambda_n of the level-n rate matrix.

    lambda_0 = 0 and lambda_m = -gamma * (sum_{k<m} theta**k + 2*theta**m).
    lambda_m is the decay rate of the Haar modes attached to level-(m-1)
    nodes, with multiplicity 2**(m-1).
    """
    if n < 0:
        raise ValueError(f"level must be >= 0, got {n}")
    out = [0.0]
    powers: list[float] = []
    acc = 1.0
    for m in range(1, n + 1):
        head = math.fsum(powers)
        acc *= params.theta
        powers.append(acc)
        out.append(-params.gamma * (head + 2.0 * acc))
    return out


def eigenvalues_ratio_form(n: int, params: Params) -> list[float]:
    """Same eigenvalues through the geometric-series closed form.

    lambda_m = -gamma * (2*theta**(m+1) - theta**m - theta) / (theta - 1),
    valid away from theta = 1 where the series form has no singularity.
    Kept as an independent cross-check of eigenvalues().
    """
    theta = params.theta
    if abs(theta - 1.0) <= 1e-9:
        raise ValueError("ratio form is singular at theta = 1; use eigenvalues()")
    out = [0.0]
    for m in range(1, n + 1):
        out.append(-params.gamma * (2.0 * theta ** (m + 1) - theta**m - theta) / (theta - 1.0))
    return out


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues of the level-n chain; the Haar basis is evaluated on demand."""

    level: int
    params: Params
    eigenvalues: tuple[float, ...]

    @classmethod
    def build(cls, n: int, params: Params) -> "SpectralDecomposition":
        return cls(level=n, params=params, eigenvalues=tuple(eigenvalues(n, params)))

    def multiplicity(self, m: int) -> int:
        if not 0 <= m <= self.level:
            raise ValueError(f"mode index {m} outside 0..{self.level}")
        return 1 if m == 0 else 2 ** (m - 1)

    def multiplicities(self) -> list[int]:
        return [self.multiplicity(m) for m in range(self.level + 1)]


def haar_eval(v: Word, x: Word) -> float:
    """Haar function of the node v evaluated on the cell of x.

    2**(level(v)/2) on [v0], the negative of that on [v1], 0 outside [v].
    These are the eigenfunctions of the generator, orthonormal under the
    uniform weight 2**-n on level-n cells.
    """
    if x.level < v.level + 1:
        raise ValueError("x must resolve at least one digit below v")
    if x.prefix(v.level) != v:
        return 0.0
    scale = math.sqrt(2.0**v.level)
    return scale if x.digit(v.level + 1) == 0 else -scale


@dataclass(frozen=True)
class TransitionKernel:
    """Stochastic matrix exp(t * Q) of a level-n chain."""

    level: int
    time: float
    params: Params
    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)


def kernel_deviations(n: int, t: float, params: Params) -> np.ndarray:
    """Kernel entries minus the uniform value 2**-n, by separation class.

    Index c in 1..n holds the deviation of any entry with separation c; index
    n+1 holds the diagonal deviation (index 0 is unused).  Working with
    deviations avoids the 1 + x cancellation when the kernel is nearly
    uniform, which is what total-variation computations need.
    """
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    if not (t >= 0.0):
        raise ValueError(f"time must be >= 0, got {t}")
    lam = eigenvalues(n, params)
    terms = [2.0 ** (m - 1) * math.exp(lam[m] * t) for m in range(1, n + 1)]
    scale = 2.0**-n
    dev = np.empty(n + 2)
    dev[0] = np.nan
    for c in range(1, n + 1):
        dev[c] = scale * math.fsum(terms[: c - 1] + [-terms[c - 1]])
    dev[n + 1] = scale * math.fsum(terms)
    return dev


def transition_kernel_spectral(n: int, t: float, params: Params) -> TransitionKernel:
    """Closed-form transition kernel assembled from the Haar eigenstructure.

    Every entry is 2**-n plus the class deviation of its separation index, so
    assembly costs one lookup per entry after an O(n^2) scalar stage.  At
    t = 0 the table values cancel exactly and the identity matrix is returned
    bit-for-bit.
    """
    if n > MAX_DENSE_LEVEL:
        raise LevelCapError(f"level {n} exceeds the dense-matrix cap {MAX_DENSE_LEVEL}")
    dev = kernel_deviations(n, t, params)
    entries = 2.0**-n + dev[_class_matrix(n)]
    return TransitionKernel(level=n, time=float(t), params=params, entries=entries)


def kernel_entry(u: Word, v: Word, t: float, params: Params) -> float:
    """Single kernel entry P_n(t)[u, v] without materializing the matrix."""
    if u.level != v.level:
        raise ValueError(f"levels differ: {u.level} vs {v.level}")
    n = u.level
    if n < 1:
        raise ValueError("level must be >= 1")
    dev = kernel_deviations(n, t, params)
    c = separation_index(u, v)
    return 2.0**-n + (dev[n + 1] if c is INFINITE else dev[c])


def kernel_row(u: Word, t: float, params: Params) -> np.ndarray:
    """One kernel row P_n(t)[u, .] over all level-n cells in index order."""
    n = u.level
    if n < 1:
        raise ValueError("level must be >= 1")
    if n > MAX_ROW_LEVEL:
        raise LevelCapError(f"level {n} exceeds the row cap {MAX_ROW_LEVEL}")
    dev = kernel_deviations(n, t, params)
    xor = (u.pattern ^ np.arange(1 << n, dtype=np.int64)).astype(np.float64)
    _, exp = np.frexp(xor)
    classes = (n + 1) - exp.astype(np.int64)
    return 2.0**-n + dev[classes]


def ball_transition_probability(k: int, t: float, params: Params) -> float:
    """Probability that the time-t state first differs from the start at digit k.

    Equivalently: the state lies in the level-(k-1) ball around the start but
    not the level-k ball, i.e. the displacement is exactly 3**-k.  Closed form
    2**-k + sum_{i=0}^{k-2} 2**(i-k) exp(lambda_{i+1} t) - exp(lambda_k t) / 2,
    the difference of the two ball masses expanded in the Haar basis.  Without
    the leading constant 2**-k the expression goes negative at k = 1, so the
    constant is kept and the whole form is validated against the matrix
    oracle.  Exactly 0 at t = 0; tends to 2**-k (the invariant mass of the
    annulus) as t grows; its right derivative at 0 is the level-k jump rate.
    """
    if k < 1:
        raise ValueError(f"ball level must be >= 1, got {k}")
    if not (t >= 0.0):
        raise ValueError(f"time must be >= 0, got {t}")
    lam = eigenvalues(k, params)
    terms = [2.0**-k]
    terms += [2.0 ** (i - k) * math.exp(lam[i + 1] * t) for i in range(k - 1)]
    terms.append(-0.5 * math.exp(lam[k] * t))
    return math.fsum(terms)


def ball_occupation_probability(k: int, t: float, params: Params) -> float:
    """Probability that the time-t state still agrees with the start to digit k.

    The mass the kernel row puts on the level-k ball around the start:
    2**-k + sum_{i=0}^{k-1} 2**(i-k) exp(lambda_{i+1} t).  Exactly 1 at t = 0,
    tends to the invariant ball mass 2**-k, and differs from the level-(k-1)
    value by exactly ball_transition_probability(k, t, params).
    """
    if k < 1:
        raise ValueError(f"ball level must be >= 1, got {k}")
    if not (t >= 0.0):
        raise ValueError(f"time must be >= 0, got {t}")
    lam = eigenvalues(k, params)
    terms = [2.0**-k]
    terms += [2.0 ** (i - k) * math.exp(lam[i + 1] * t) for i in range(k)]
    return math.fsum(terms)


def _expm_uniformized(rate_matrix: np.ndarray, t: float, tail: float = _SERIES_TAIL) -> np.ndarray:
    """exp(t * Q) for a conservative rate matrix with constant diagonal.

    Uniformization: with L = |diagonal| the matrix B = I + Q/L is stochastic
    and exp(tQ) is the Poisson(L t)-weighted average of its powers.  The
    series is truncated when the remaining Poisson mass drops below `tail`.
    Large L t is split as exp(tQ) = exp(tQ / 2**s) ** (2**s) with s chosen so
    each segment's Poisson mean stays moderate; the nonnegative series plus
    squaring keeps every intermediate matrix (sub)stochastic.
    """
    dim = rate_matrix.shape[0]
    rate = -float(rate_matrix[0, 0])
    if t == 0.0 or rate <= 0.0:
        return np.eye(dim)
    mean = rate * t
    squarings = max(0, math.ceil(math.log2(mean / _SEGMENT_MEAN))) if mean > _SEGMENT_MEAN else 0
    segment_mean = mean / 2.0**squarings
    jump_chain = np.eye(dim) + rate_matrix / rate
    weight = math.exp(-segment_mean)
    covered = weight
    power = np.eye(dim)
    total = weight * power
    j = 0
    while 1.0 - covered > tail:
        j += 1
        if j > 100_000:
            raise RuntimeError("uniformization series failed to converge")
        weight *= segment_mean / j
        power = power @ jump_chain
        total += weight * power
        covered += weight
    for _ in range(squarings):
        total = total @ total
    return total


def transition_kernel_oracle(n: int, t: float, params: Params) -> TransitionKernel:
    """Independent matrix-exponential kernel for cross-checking the closed form.

    Exponentiates build_generator(n) by uniformization, sharing nothing with
    the spectral assembly beyond the rate matrix itself.
    """
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    if n > ORACLE_MAX_LEVEL:
        raise LevelCapError(f"level {n} exceeds the oracle cap {ORACLE_MAX_LEVEL}")
    if not (t >= 0.0):
        raise ValueError(f"time must be >= 0, got {t}")
    entries = _expm_uniformized(build_generator(n, params).entries, float(t))
    return TransitionKernel(level=n, time=float(t), params=params, entries=entries)


def confined_generator_block(v: Word, resolution: int, params: Params) -> np.ndarray:
    """Conditioned rate matrix of the process restricted to the cells of [v].

    The restriction of the full level-m rate matrix to cells inside [v] loses
    the constant escape rate gamma * sum_{k<=level(v)} theta**k from each
    diagonal; conditioning on staying inside adds it back, leaving the rate
    matrix below with zero row sums on the 2**(m - level(v)) inner cells.
    """
    m = resolution
    if m <= v.level:
        raise ValueError(f"resolution {m} must exceed level(v) = {v.level}")
    if m > MAX_DENSE_LEVEL:
        raise LevelCapError(f"resolution {m} exceeds the dense-matrix cap {MAX_DENSE_LEVEL}")
    inner = m - v.level
    table = np.empty(inner + 2)
    table[0] = np.nan
    table[inner + 1] = -math.fsum(params.rates(m)[v.level + 1 :])
    for cs in range(1, inner + 1):
        c = v.level + cs
        table[cs] = params.gamma * params.theta**c * 2.0 ** (cs - inner)
    return table[_class_matrix(inner)]


def confined_kernel(v: Word, s: float, params: Params, resolution: int) -> TransitionKernel:
    """Transition kernel of the process conditioned to stay inside [v].

    Computed as the matrix exponential of the conditioned restricted block
    (the escape-rate renormalization exp(+rate_out * s) folded into the
    diagonal).  Self-similarity makes the result coincide with the full
    process at level resolution - level(v) run at time theta**level(v) * s;
    that equality is a test, not the implementation.
    """
    if not (s >= 0.0):
        raise ValueError(f"time must be >= 0, got {s}")
    inner = resolution - v.level
    if inner > ORACLE_MAX_LEVEL:
        raise LevelCapError(
            f"confined block level {inner} exceeds the oracle cap {ORACLE_MAX_LEVEL}"
        )
    block = confined_generator_block(v, resolution, params)
    entries = _expm_uniformized(block, float(s))
    return TransitionKernel(level=inner, time=float(s), params=params, entries=entries)
