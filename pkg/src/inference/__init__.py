"""
Inference module.
Sampling, maximum-likelihood and minimal-residual estimation, two-stage
adaptive estimation and Monte Carlo covariance analysis.
"""

from .sampling import OutcomeCounts, sample_outcomes, expected_counts, derive_rng
from .likelihood import Estimate, MaximumLikelihoodEstimator, is_trapped, label_mask, mle_estimate, wrap_phase
from .adaptive import adaptive_two_step, simulate_adaptive, simulate_counts
from .residual import ResidualEstimator, residual_estimate
from .monte_carlo import MonteCarloReport, MonteCarloRunner, monte_carlo_covariance, unwrap_towards

__all__ = [
    "OutcomeCounts",
    "sample_outcomes",
    "expected_counts",
    "derive_rng",
    "Estimate",
    "MaximumLikelihoodEstimator",
    "mle_estimate",
    "wrap_phase",
    "is_trapped",
    "label_mask",
    "adaptive_two_step",
    "simulate_adaptive",
    "simulate_counts",
    "ResidualEstimator",
    "residual_estimate",
    "MonteCarloReport",
    "MonteCarloRunner",
    "monte_carlo_covariance",
    "unwrap_towards",
]
