"""Symmetric self-similar Markov jump processes on the triadic Cantor set.

Points of the Cantor set are addressed by binary words; the process at
parameters (gamma, theta) flips digit k at rate gamma * theta**k and redraws
everything deeper uniformly.  The package provides the exact generator
matrices, their Haar spectral decomposition and closed-form transition
kernels, event-exact and endpoint-exact path simulation with splittable
reproducible randomness, total-variation mixing analysis, and
displacement-moment asymptotics in both scaling regimes — each closed form
cross-checked against an independent numerical oracle.
"""

from ._backend import BACKEND
from .analysis import (
    MixingCurve,
    MixingReport,
    MomentCurve,
    level_one_residual,
    mixing_bound,
    mixing_report,
    moment_analytic,
    moment_curve,
    moment_empirical,
    moment_empirical_stats,
    moment_growth_rate,
    moment_limit,
    moment_truncation,
    scaling_expected_slope,
    scaling_exponent,
    scaling_regime,
    scaling_report,
    tv_to_uniform,
)
from .errors import LevelCapError, RejectionBudgetError
from .generator import (
    GeneratorMatrix,
    SpectralDecomposition,
    TransitionKernel,
    apply_generator_cylindric,
    ball_occupation_probability,
    ball_transition_probability,
    build_generator,
    confined_generator_block,
    confined_kernel,
    eigenvalues,
    eigenvalues_ratio_form,
    haar_eval,
    jump_rate,
    jump_rate_level,
    kernel_deviations,
    kernel_entry,
    kernel_row,
    transition_kernel_oracle,
    transition_kernel_spectral,
)
from .params import Params
from .simulate import (
    MAX_SIMULATION_DEPTH,
    PathEvent,
    PathSample,
    acceptance_probability,
    confined_empirical_kernel,
    default_rejection_budget,
    displacement_counts,
    empirical_kernel,
    endpoint_kernel,
    jump_count_by_level,
    simulate_confined,
    simulate_path,
    state_at,
)
from .streams import SplitStream
from .words import (
    INFINITE,
    Isometry,
    Word,
    apply_isometry,
    identity_isometry,
    random_isometry,
    sample_bernoulli_word,
    separation_index,
    similarity_shift,
    ultrametric_distance,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "INFINITE",
    "GeneratorMatrix",
    "Isometry",
    "LevelCapError",
    "MAX_SIMULATION_DEPTH",
    "MixingCurve",
    "MixingReport",
    "MomentCurve",
    "Params",
    "PathEvent",
    "PathSample",
    "RejectionBudgetError",
    "SpectralDecomposition",
    "SplitStream",
    "TransitionKernel",
    "Word",
    "acceptance_probability",
    "apply_generator_cylindric",
    "apply_isometry",
    "ball_occupation_probability",
    "ball_transition_probability",
    "build_generator",
    "confined_empirical_kernel",
    "confined_generator_block",
    "confined_kernel",
    "default_rejection_budget",
    "displacement_counts",
    "eigenvalues",
    "eigenvalues_ratio_form",
    "empirical_kernel",
    "endpoint_kernel",
    "haar_eval",
    "identity_isometry",
    "jump_count_by_level",
    "jump_rate",
    "jump_rate_level",
    "kernel_deviations",
    "kernel_entry",
    "kernel_row",
    "level_one_residual",
    "mixing_bound",
    "mixing_report",
    "moment_analytic",
    "moment_curve",
    "moment_empirical",
    "moment_empirical_stats",
    "moment_growth_rate",
    "moment_limit",
    "moment_truncation",
    "random_isometry",
    "sample_bernoulli_word",
    "scaling_expected_slope",
    "scaling_exponent",
    "scaling_regime",
    "scaling_report",
    "separation_index",
    "similarity_shift",
    "simulate_confined",
    "simulate_path",
    "state_at",
    "transition_kernel_oracle",
    "transition_kernel_spectral",
    "tv_to_uniform",
    "ultrametric_distance",
]
