"""Divergence rates between Markov switching models."""

from ._hmmdiv import (
    ConfigError,
    DegenerateInputError,
    GridSpec,
    GridTooCoarseError,
    HmmdivError,
    InvalidModelError,
    McConfig,
    ModelA,
    ModelB,
    NonConvergenceError,
    NumericError,
    divergence_fredholm,
    divergence_mc,
    log_likelihood,
    noncentral_chisq1_cdf,
    paper_cases_json,
    run_config,
    sample_path,
    stationary_distribution,
)

__all__ = [
    "ConfigError",
    "DegenerateInputError",
    "GridSpec",
    "GridTooCoarseError",
    "HmmdivError",
    "InvalidModelError",
    "McConfig",
    "ModelA",
    "ModelB",
    "NonConvergenceError",
    "NumericError",
    "divergence_fredholm",
    "divergence_mc",
    "log_likelihood",
    "noncentral_chisq1_cdf",
    "paper_cases_json",
    "run_config",
    "sample_path",
    "stationary_distribution",
]
