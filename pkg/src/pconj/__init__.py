"""Partial conjunction (replicability) testing toolkit.

Combines per-study p-values or e-values into a single test of the claim
that an effect replicated in at least gamma of s studies, and ships a
deterministic Monte Carlo engine for power and calibration experiments.
"""

from .combiners import P_METHODS, partial_conjunction_p
from .evalues import (
    BayesFactorSpec,
    adjusted_e,
    bayes_factor,
    e_merge,
    e_to_p,
    null_expectation,
    partial_conjunction_e,
)
from .models import (
    DEFAULT_SIGMA,
    STUDIES,
    EvidencePattern,
    find_pattern,
    pattern_catalog,
)
from .rng import RngStream
from .sim import (
    ExperimentConfig,
    GammaPowerRow,
    SimResult,
    gamma_sweep,
    relative_power,
    run_ecdf_curve,
    run_null_ecdf,
    run_power,
    weaken_pattern,
)

__version__ = "0.1.0"

__all__ = [
    "BayesFactorSpec",
    "DEFAULT_SIGMA",
    "EvidencePattern",
    "ExperimentConfig",
    "GammaPowerRow",
    "P_METHODS",
    "RngStream",
    "STUDIES",
    "SimResult",
    "adjusted_e",
    "bayes_factor",
    "e_merge",
    "e_to_p",
    "find_pattern",
    "gamma_sweep",
    "null_expectation",
    "partial_conjunction_e",
    "partial_conjunction_p",
    "pattern_catalog",
    "relative_power",
    "run_ecdf_curve",
    "run_null_ecdf",
    "run_power",
    "weaken_pattern",
    "__version__",
]
