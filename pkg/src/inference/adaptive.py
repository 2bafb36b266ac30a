"""
Two-stage adaptive estimation.

Stage 1 spends a fraction of the shot budget on a rough phase estimate.
Stage 2 rotates the measurement directions by that estimate, which moves the
working point to phi = 0 where the phase/diffusion correlation vanishes.
"""
from typing import Callable, Optional
import numpy as np
from loguru import logger

from src.exceptions import InvalidParameterError
from src.estimation import ParamPoint
from src.measurement import OUTCOME_LABELS, outcome_probabilities
from .likelihood import Estimate, MaximumLikelihoodEstimator
from .sampling import OutcomeCounts, SeedLike, as_generator, sample_outcomes

# (frame offset, shots) -> counts measured in the rotated frame
StageSampler = Callable[[float, int], OutcomeCounts]


def simulate_counts(
    truth: ParamPoint,
    theta: float,
    shots: int,
    rng: SeedLike = None,
    frame_offset: float = 0.0
) -> OutcomeCounts:
    """Sampled weak-scheme counts with measurement directions rotated by ``frame_offset``."""
    p = outcome_probabilities(truth.phi - frame_offset, truth.delta, theta)
    return sample_outcomes(p, shots, seed=rng, labels=OUTCOME_LABELS)


def adaptive_two_step(
    counts_stage1: OutcomeCounts,
    budget_split: float,
    theta: float,
    stage2_sampler: StageSampler,
    estimator: Optional[MaximumLikelihoodEstimator] = None
) -> Estimate:
    """
    Finish an adaptive run given the stage-1 data.

    Args:
        counts_stage1: Counts of the first stage, measured in the lab frame
        budget_split: Fraction of the total budget spent in stage 1, in (0, 1)
        theta: Measurement strength
        stage2_sampler: Runs stage 2 at a given frame offset and shot count
        estimator: Estimator to use (defaults to a configured one)

    Returns:
        Joint estimate from both stages, in the lab frame
    """
    if not 0 < budget_split < 1:
        raise InvalidParameterError(f"budget_split must lie in (0, 1), got {budget_split}")
    estimator = estimator or MaximumLikelihoodEstimator()

    rough = estimator.estimate(counts_stage1, theta)
    total = counts_stage1.shots / budget_split
    shots_stage2 = int(round(total - counts_stage1.shots))
    if shots_stage2 < 1:
        raise InvalidParameterError("Stage-2 budget is empty; increase the total budget")

    offset = rough.phi_hat
    logger.debug(f"Adaptive stage 2: rotating frame by {offset:.6f} rad, {shots_stage2} shots")
    counts_stage2 = stage2_sampler(offset, shots_stage2)

    return estimator.estimate_joint(
        [(counts_stage1, 0.0), (counts_stage2, offset)],
        theta,
    )


def simulate_adaptive(
    truth: ParamPoint,
    theta: float,
    shots: int,
    budget_split: float,
    seed: SeedLike = None,
    estimator: Optional[MaximumLikelihoodEstimator] = None
) -> Estimate:
    """Full simulated two-stage run with ``shots`` in total."""
    if int(shots) != shots or shots < 2:
        raise InvalidParameterError(f"shots must be an integer >= 2, got {shots}")
    rng = as_generator(seed)
    shots_stage1 = max(1, int(round(budget_split * shots)))
    counts_stage1 = simulate_counts(truth, theta, shots_stage1, rng)

    def sampler(offset: float, n: int) -> OutcomeCounts:
        return simulate_counts(truth, theta, n, rng, frame_offset=offset)

    # the split actually realised after rounding
    split = shots_stage1 / shots
    return adaptive_two_step(counts_stage1, split, theta, sampler, estimator)
