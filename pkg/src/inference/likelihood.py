"""
Maximum-likelihood joint estimation of phase and phase diffusion.
Coarse grid search followed by multi-start Nelder-Mead refinement.
"""
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Sequence, Tuple
import numpy as np
from scipy.optimize import minimize
from loguru import logger

from src.config import load_simulation_config
from src.exceptions import EstimationError, InvalidParameterError, NonIdentifiableError
from src.measurement import OUTCOME_LABELS, MeasurementStrength, outcome_probabilities
from .sampling import OutcomeCounts

PROBABILITY_FLOOR = 1e-300
THETA_EDGE_TOL = 1e-12
EDGE_TOL = 1e-6
# A start cell this far from delta = 0 marks a competing basin
TRAP_RUNNER_UP = 0.05

# Joint dataset: counts and the known rotation of the measurement frame
Dataset = Tuple[OutcomeCounts, float]


def wrap_phase(phi: float, lower: float = -np.pi) -> float:
    """Reduce ``phi`` into (lower, lower + 2 pi]."""
    upper = lower + 2.0 * np.pi
    return float(phi - 2.0 * np.pi * np.ceil((phi - upper) / (2.0 * np.pi)))


def is_trapped(delta_hat: float, start_deltas: Sequence[float], threshold: float, runner_up: float) -> bool:
    """
    Whether a refined optimum collapsed onto the delta = 0 stationary point
    although one of the seeded grid cells sat at delta >= ``runner_up``.
    """
    return bool(delta_hat < threshold and any(d >= runner_up for d in start_deltas))


def label_mask(label: str) -> np.ndarray:
    """
    Which weak-scheme outcomes a label covers.

    Labels are two characters (w, s) from {+, -, *}; "*" sums over that
    index, so "*-" is the merged output of the interferometer.
    """
    if len(label) != 2 or any(ch not in "+-*" for ch in label):
        raise InvalidParameterError(f"Invalid outcome label: {label!r}")
    return np.array([
        all(want == "*" or want == have for want, have in zip(label, outcome))
        for outcome in OUTCOME_LABELS
    ], dtype=float)


@dataclass
class Estimate:
    """Estimator output."""
    phi_hat: float
    delta_hat: float
    converged: bool
    log_likelihood: float
    trapped_at_zero: bool = False
    at_domain_edge: bool = False
    n_evaluations: int = 0

    def to_dict(self) -> Dict:
        return asdict(self)


class MaximumLikelihoodEstimator:
    """
    Joint (phi, delta) maximum-likelihood estimator for weak-scheme counts.

    The likelihood is maximised by minimising sum_x c_x log(c_x / (M p_x)) / M,
    which is zero for a perfect fit. The default phase domain is (-pi, pi]
    because the outcome distribution is 2 pi periodic in phi.
    """

    def __init__(self, config: Dict = None):
        """
        Initialize estimator.

        Args:
            config: Estimator configuration (``estimator`` section of the
                simulation config)
        """
        if config is None:
            config = load_simulation_config().get("estimator", {})
        self.config = config

        self.grid_phi = int(self.config.get("grid_phi", 120))
        self.grid_delta = int(self.config.get("grid_delta", 60))
        self.delta_min = float(self.config.get("delta_min", 0.0))
        self.delta_max = float(self.config.get("delta_max", 2.0))
        self.n_starts = int(self.config.get("n_starts", 3))
        self.xatol = float(self.config.get("xatol", 1e-10))
        self.fatol = float(self.config.get("fatol", 1e-14))
        self.max_iter = int(self.config.get("max_iter", 4000))
        self.trap_threshold = float(self.config.get("trap_threshold", 1e-3))
        self.trap_runner_up = float(self.config.get("trap_runner_up", TRAP_RUNNER_UP))

        if self.grid_phi < 2 or self.grid_delta < 2 or self.n_starts < 1:
            raise InvalidParameterError("Estimator grid needs >= 2 points per axis and >= 1 start")
        if not 0 <= self.delta_min < self.delta_max:
            raise InvalidParameterError(f"Invalid delta bounds [{self.delta_min}, {self.delta_max}]")

        logger.info("MaximumLikelihoodEstimator initialized")

    def estimate(
        self,
        counts: OutcomeCounts,
        theta,
        search_domain: Optional[Tuple[float, float]] = None,
        frame_offset: float = 0.0
    ) -> Estimate:
        """
        Estimate (phi, delta) from one dataset.

        Args:
            counts: Outcome counts labelled in (w, s) notation
            theta: Measurement strength strictly inside (0, pi/2)
            search_domain: Phase interval (lower, upper]; defaults to (-pi, pi]
            frame_offset: Known rotation of the measurement directions; the
                data then follow p(phi - frame_offset)

        Returns:
            Estimate in the original frame
        """
        return self.estimate_joint([(counts, frame_offset)], theta, search_domain)

    def estimate_joint(
        self,
        datasets: Sequence[Dataset],
        theta,
        search_domain: Optional[Tuple[float, float]] = None
    ) -> Estimate:
        """Maximum-likelihood estimate from several datasets sharing (phi, delta)."""
        theta = self._check_theta(theta)
        if not datasets:
            raise InvalidParameterError("No datasets given")
        lower, upper = self._check_domain(search_domain)
        prepared = [self._prepare(counts, offset) for counts, offset in datasets]
        # Per-shot scale keeps fatol meaningful for any number of shots
        norm = sum(float(np.sum(c)) for c, _, _, _ in prepared)

        def objective_grid(phi: np.ndarray, delta: np.ndarray) -> np.ndarray:
            total = 0.0
            for c, mask, offset, log_c in prepared:
                p = outcome_probabilities(phi - offset, delta, theta) @ mask.T
                p = np.maximum(p * np.sum(c), PROBABILITY_FLOOR)
                total = total + np.sum(np.where(c > 0, c * (log_c - np.log(p)), 0.0), axis=-1)
            return total / norm

        def objective(x: np.ndarray) -> float:
            return float(objective_grid(np.array(x[0]), np.array(x[1])))

        # Coarse grid
        phis = lower + (upper - lower) * np.arange(1, self.grid_phi + 1) / self.grid_phi
        deltas = np.linspace(self.delta_min, self.delta_max, self.grid_delta)
        values = objective_grid(phis[:, None], deltas[None, :])
        order = np.argsort(values, axis=None)[: self.n_starts]
        starts = [np.unravel_index(k, values.shape) for k in order]

        d_phi = (upper - lower) / self.grid_phi
        d_delta = (self.delta_max - self.delta_min) / (self.grid_delta - 1)
        full_circle = upper - lower >= 2.0 * np.pi - 1e-12
        bounds = [(None, None) if full_circle else (lower, upper), (self.delta_min, self.delta_max)]

        best = None
        evaluations = int(values.size)
        for i, j in starts:
            x0 = np.array([phis[i], deltas[j]])
            simplex = self._initial_simplex(x0, d_phi, d_delta, lower, upper, full_circle)
            result = minimize(
                objective,
                x0,
                method="Nelder-Mead",
                bounds=bounds,
                options={
                    "initial_simplex": simplex,
                    "xatol": self.xatol,
                    "fatol": self.fatol,
                    "maxiter": self.max_iter,
                    "maxfev": 4 * self.max_iter,
                },
            )
            evaluations += int(result.nfev)
            if not result.success:
                logger.warning(f"Local refinement did not converge from {x0}: {result.message}")
            if best is None or result.fun < best.fun:
                best = result

        if best is None or not np.isfinite(best.fun):
            raise EstimationError("Likelihood refinement produced no finite optimum")

        phi_hat = wrap_phase(best.x[0], lower) if full_circle else float(best.x[0])
        delta_hat = float(np.clip(best.x[1], self.delta_min, self.delta_max))
        start_deltas = [float(deltas[j]) for _, j in starts]
        trapped = is_trapped(delta_hat, start_deltas, self.trap_threshold, self.trap_runner_up)
        at_edge = delta_hat >= self.delta_max - EDGE_TOL
        if trapped:
            logger.debug(f"Estimate trapped at delta = 0 (delta_hat={delta_hat:.3e}, starts at delta={start_deltas})")

        return Estimate(
            phi_hat=phi_hat,
            delta_hat=delta_hat,
            converged=bool(best.success),
            log_likelihood=self._log_likelihood(prepared, theta, phi_hat, delta_hat),
            trapped_at_zero=bool(trapped),
            at_domain_edge=bool(at_edge),
            n_evaluations=evaluations,
        )

    @staticmethod
    def _check_theta(theta) -> float:
        theta = MeasurementStrength.coerce(theta).theta
        if theta < THETA_EDGE_TOL or theta > np.pi / 2 - THETA_EDGE_TOL:
            raise NonIdentifiableError(
                f"theta={theta} makes the Fisher matrix singular; phi and delta are not jointly identifiable"
            )
        return theta

    @staticmethod
    def _check_domain(search_domain) -> Tuple[float, float]:
        if search_domain is None:
            return -np.pi, np.pi
        lower, upper = (float(v) for v in search_domain)
        if not upper > lower or upper - lower > 2.0 * np.pi + 1e-12:
            raise InvalidParameterError(f"Invalid phase search domain ({lower}, {upper}]")
        return lower, upper

    @staticmethod
    def _prepare(counts: OutcomeCounts, offset: float):
        mask = np.vstack([label_mask(label) for label in counts.labels])
        covered = mask.sum(axis=0)
        if np.any(covered > 1):
            raise InvalidParameterError(f"Outcome labels overlap: {counts.labels}")
        c = counts.as_array()
        log_c = np.log(np.where(c > 0, c, 1.0))
        return c, mask, float(offset), log_c

    def _initial_simplex(self, x0, d_phi, d_delta, lower, upper, full_circle) -> np.ndarray:
        step_phi = 0.5 * d_phi
        if not full_circle and x0[0] + step_phi > upper:
            step_phi = -step_phi
        step_delta = 0.5 * d_delta
        if x0[1] + step_delta > self.delta_max:
            step_delta = -step_delta
        return np.array([
            x0,
            x0 + np.array([step_phi, 0.0]),
            x0 + np.array([0.0, step_delta]),
        ])

    @staticmethod
    def _log_likelihood(prepared, theta: float, phi: float, delta: float) -> float:
        """sum_x c_x log p_x (no multinomial constant)."""
        total = 0.0
        for c, mask, offset, _ in prepared:
            p = mask @ outcome_probabilities(phi - offset, delta, theta)
            total += float(np.sum(np.where(c > 0, c * np.log(np.maximum(p, PROBABILITY_FLOOR)), 0.0)))
        return total


def mle_estimate(
    counts: OutcomeCounts,
    theta,
    search_domain: Optional[Tuple[float, float]] = None,
    frame_offset: float = 0.0,
    config: Dict = None
) -> Estimate:
    """Functional wrapper around ``MaximumLikelihoodEstimator.estimate``."""
    return MaximumLikelihoodEstimator(config).estimate(
        counts, theta, search_domain=search_domain, frame_offset=frame_offset
    )
