"""
Outcome counts and seeded multinomial sampling.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Union
import numpy as np

from src.exceptions import InvalidParameterError

NORMALIZATION_TOL = 1e-8

SeedLike = Union[int, Sequence[int], np.random.Generator, None]


@dataclass(frozen=True)
class OutcomeCounts:
    """
    Counts per outcome label.

    Counts may be fractional (expected frequencies, detector intensities);
    ``shots`` is their sum.
    """
    labels: tuple
    counts: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        counts = tuple(float(c) for c in self.counts)
        if len(labels) != len(counts) or not labels:
            raise InvalidParameterError("labels and counts must be non-empty and of equal length")
        if len(set(labels)) != len(labels):
            raise InvalidParameterError(f"Duplicate outcome labels: {labels}")
        if any((not np.isfinite(c)) or c < 0 for c in counts):
            raise InvalidParameterError(f"Counts must be finite and >= 0, got {counts}")
        if sum(counts) <= 0:
            raise InvalidParameterError("Counts are all zero")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_dict(cls, counts: Dict[str, float]) -> "OutcomeCounts":
        return cls(labels=tuple(counts.keys()), counts=tuple(counts.values()))

    @property
    def shots(self) -> float:
        return float(sum(self.counts))

    def as_array(self) -> np.ndarray:
        return np.array(self.counts)

    def frequencies(self) -> np.ndarray:
        return self.as_array() / self.shots

    def to_dict(self) -> Dict[str, float]:
        return dict(zip(self.labels, self.counts))


def derive_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for task ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng([int(seed), int(index)])


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def check_distribution(distribution) -> np.ndarray:
    p = np.asarray(distribution, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidParameterError("Distribution must be a non-empty vector")
    total = float(np.sum(p))
    if abs(total - 1.0) > NORMALIZATION_TOL or np.any(p < -NORMALIZATION_TOL):
        raise InvalidParameterError(f"Distribution is not normalized (sum = {total:.12f})")
    p = np.clip(p, 0.0, None)
    return p / np.sum(p)


def sample_outcomes(
    distribution,
    shots: int,
    seed: SeedLike = None,
    labels: Optional[Sequence[str]] = None
) -> OutcomeCounts:
    """
    Multinomial draw of ``shots`` outcomes.

    Args:
        distribution: Normalized probability vector
        shots: Number of repetitions M >= 1
        seed: Integer seed, seed sequence or Generator
        labels: Outcome labels (defaults to "0", "1", ...)
    """
    p = check_distribution(distribution)
    if int(shots) != shots or shots < 1:
        raise InvalidParameterError(f"shots must be a positive integer, got {shots}")
    if labels is None:
        labels = [str(k) for k in range(p.size)]
    if len(labels) != p.size:
        raise InvalidParameterError("labels must match the distribution length")

    counts = as_generator(seed).multinomial(int(shots), p)
    return OutcomeCounts(labels=tuple(labels), counts=tuple(int(c) for c in counts))


def expected_counts(distribution, shots: float, labels: Sequence[str]) -> OutcomeCounts:
    """Noiseless fractional counts M p."""
    p = check_distribution(distribution)
    return OutcomeCounts(labels=tuple(labels), counts=tuple(shots * p))
