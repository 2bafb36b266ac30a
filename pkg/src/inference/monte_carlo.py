"""
Monte Carlo covariance analysis of the estimators.
Repeats noisy data generation and estimation, then compares the empirical
covariance with the Cramer-Rao bound at a chosen scale.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Union
import numpy as np
import pandas as pd
from tqdm import tqdm
from loguru import logger

from src.config import load_simulation_config, settings
from src.exceptions import EstimationError, InvalidParameterError, NonIdentifiableError
from src.estimation import CovarianceBound, ParamPoint, crb_covariance, fisher_from_model
from src.measurement import analytic_fisher
from src.device import (
    CalibrationTable,
    DeviceConfig,
    SagnacDevice,
    calibration_scan,
    device_probabilities,
)
from src.device.sagnac import as_device_config
from .adaptive import simulate_counts
from .likelihood import Estimate, MaximumLikelihoodEstimator
from .residual import ResidualEstimator
from .sampling import derive_rng

METHODS = ("residual", "mle")

# One repetition: generator -> estimate
Trial = Callable[[np.random.Generator], Estimate]


def unwrap_towards(phi_hat: float, reference: float) -> float:
    """Shift ``phi_hat`` by a multiple of 2 pi to the branch closest to ``reference``."""
    return float(phi_hat - 2.0 * np.pi * np.round((phi_hat - reference) / (2.0 * np.pi)))


@dataclass
class MonteCarloReport:
    """Samples, empirical covariance and comparison bound of a Monte Carlo run."""
    truth: ParamPoint
    method: str
    phi_samples: np.ndarray
    delta_samples: np.ndarray
    trapped: np.ndarray
    covariance: np.ndarray
    bound: Optional[CovarianceBound]
    m_prime: float
    seed: int
    n_failed: int = 0
    seeds: Dict = field(default_factory=dict)

    @property
    def repetitions(self) -> int:
        return int(self.phi_samples.size)

    @property
    def phi_hat(self) -> float:
        return float(np.mean(self.phi_samples))

    @property
    def delta_hat(self) -> float:
        return float(np.mean(self.delta_samples))

    @property
    def trapped_fraction(self) -> float:
        return float(np.mean(self.trapped)) if self.trapped.size else 0.0

    def correlation(self) -> float:
        """Empirical phi-delta correlation coefficient (NaN for a degenerate sample)."""
        var_phi, var_delta = self.covariance[0, 0], self.covariance[1, 1]
        if var_phi <= 0 or var_delta <= 0:
            return float("nan")
        return float(self.covariance[0, 1] / np.sqrt(var_phi * var_delta))

    def aspect_ratio(self) -> float:
        """Var(delta_hat) / Var(phi_hat)."""
        if self.covariance[0, 0] <= 0:
            return float("nan")
        return float(self.covariance[1, 1] / self.covariance[0, 0])

    def mse(self) -> np.ndarray:
        """Mean squared errors (phi, delta) with respect to the truth."""
        return np.array([
            np.mean((self.phi_samples - self.truth.phi) ** 2),
            np.mean((self.delta_samples - self.truth.delta) ** 2),
        ])

    def samples_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "run": np.arange(self.repetitions),
            "phi_hat": self.phi_samples,
            "delta_hat": self.delta_samples,
            "trapped": self.trapped,
        })

    def to_dict(self) -> Dict:
        return {
            "phi_hat": self.phi_hat,
            "delta_hat": self.delta_hat,
            "cov": self.covariance.tolist(),
            "trapped_fraction": self.trapped_fraction,
            "m_prime": self.m_prime,
            "seeds": self.seeds,
            "truth": self.truth.to_dict(),
            "method": self.method,
            "repetitions": self.repetitions,
            "n_failed": self.n_failed,
            "bound": self.bound.to_dict() if self.bound is not None else None,
        }


class MonteCarloRunner:
    """
    Runs independent estimation repetitions in a thread pool.

    Repetition ``i`` draws from ``default_rng([seed, i])``; results are
    gathered in index order, so a run is reproducible for any worker count.
    """

    def __init__(self, config: Dict = None, max_workers: Optional[int] = None, show_progress: bool = True):
        """
        Initialize runner.

        Args:
            config: Monte Carlo configuration (``monte_carlo`` section)
            max_workers: Thread count (defaults to ``settings.max_workers``)
            show_progress: Display a tqdm progress bar
        """
        if config is None:
            config = load_simulation_config().get("monte_carlo", {})
        self.config = config

        self.repetitions = int(self.config.get("repetitions", 10000))
        self.m_prime = float(self.config.get("m_prime", 400000))
        self.method = self.config.get("method", "residual")
        self.shots = int(self.config.get("shots", 100000))
        self.max_workers = max_workers or settings.max_workers
        self.show_progress = show_progress

        if self.method not in METHODS:
            raise InvalidParameterError(f"Unknown Monte Carlo method {self.method!r}; expected one of {METHODS}")

        logger.info(f"MonteCarloRunner initialized (method={self.method}, workers={self.max_workers})")

    def run_trials(
        self,
        trial: Trial,
        truth: ParamPoint,
        repetitions: int,
        seed: int
    ) -> tuple:
        """Execute ``trial`` for every repetition; failed repetitions are logged and counted."""
        if repetitions < 2:
            raise InvalidParameterError(f"repetitions must be >= 2, got {repetitions}")

        def task(index: int) -> Optional[Estimate]:
            try:
                return trial(derive_rng(seed, index))
            except (EstimationError, ValueError, FloatingPointError) as e:
                logger.error(f"Repetition {index} failed: {e}")
                return None

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            results = list(tqdm(
                executor.map(task, range(repetitions)),
                total=repetitions,
                desc=f"Monte Carlo ({self.method})",
                disable=not self.show_progress,
            ))

        estimates = [r for r in results if r is not None]
        n_failed = repetitions - len(estimates)
        if len(estimates) < 2:
            raise EstimationError(f"Only {len(estimates)} of {repetitions} repetitions succeeded")

        phi = np.array([unwrap_towards(e.phi_hat, truth.phi) for e in estimates])
        delta = np.array([e.delta_hat for e in estimates])
        trapped = np.array([e.trapped_at_zero for e in estimates], dtype=bool)
        return phi, delta, trapped, n_failed

    def run(
        self,
        truth: ParamPoint,
        repetitions: Optional[int] = None,
        seed: Optional[int] = None,
        device_config: Union[DeviceConfig, Dict, None] = None,
        calibration: Optional[CalibrationTable] = None,
        estimator_config: Optional[Dict] = None,
        theta: Optional[float] = None
    ) -> MonteCarloReport:
        """
        Monte Carlo covariance at ``truth``.

        Args:
            truth: True (phi, delta)
            repetitions: Number of repetitions (>= 2)
            seed: Root seed (defaults to ``settings.default_seed``)
            device_config: Device settings; noise_rel_std drives the residual method
            calibration: Calibration table (scanned from the device when omitted)
            estimator_config: Estimator configuration
            theta: Strength for the MLE method (defaults to the device's)

        Returns:
            MonteCarloReport with the bound evaluated at scale M'
            (``m_prime`` for the residual method, the shot count for MLE)
        """
        repetitions = self.repetitions if repetitions is None else int(repetitions)
        seed = settings.default_seed if seed is None else int(seed)
        if device_config is None:
            device_config = load_simulation_config().get("device", {})
        device_config = as_device_config(device_config)

        if self.method == "residual":
            device = SagnacDevice(device_config)
            table = calibration if calibration is not None else calibration_scan(device_config)
            estimator = ResidualEstimator(table, estimator_config)

            def trial(rng: np.random.Generator) -> Estimate:
                return estimator.estimate(device.synthesize(truth.phi, truth.delta, rng=rng))

            m_prime = self.m_prime
            model = device_probabilities(device_config.omega_deg, merged=device_config.merge_output2)
            fisher = fisher_from_model(model, truth)
        else:
            theta = device_config.theta if theta is None else float(theta)
            mle = MaximumLikelihoodEstimator(estimator_config)
            shots = self.shots

            def trial(rng: np.random.Generator) -> Estimate:
                return mle.estimate(simulate_counts(truth, theta, shots, rng), theta)

            m_prime = float(shots)
            fisher = analytic_fisher(truth.phi, truth.delta, theta)

        try:
            bound = crb_covariance(fisher, int(m_prime))
        except NonIdentifiableError as e:
            logger.warning(f"No Cramer-Rao bound at {truth}: {e}")
            bound = None

        phi, delta, trapped, n_failed = self.run_trials(trial, truth, repetitions, seed)
        covariance = np.cov(np.vstack([phi, delta]), ddof=1)

        report = MonteCarloReport(
            truth=truth,
            method=self.method,
            phi_samples=phi,
            delta_samples=delta,
            trapped=trapped,
            covariance=covariance,
            bound=bound,
            m_prime=m_prime,
            seed=seed,
            n_failed=n_failed,
            seeds={"root": seed, "derivation": "default_rng([root, index])", "count": repetitions},
        )
        if report.trapped_fraction > 0:
            logger.warning(
                f"{report.trapped_fraction:.1%} of repetitions trapped at delta = 0 (delta0={truth.delta})"
            )
        return report


def monte_carlo_covariance(
    truth: ParamPoint,
    config: Dict = None,
    repetitions: Optional[int] = None,
    seed: Optional[int] = None,
    **kwargs
) -> MonteCarloReport:
    """Functional wrapper around ``MonteCarloRunner.run``."""
    return MonteCarloRunner(config, show_progress=kwargs.pop("show_progress", False)).run(
        truth, repetitions=repetitions, seed=seed, **kwargs
    )
