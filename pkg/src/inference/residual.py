"""
Minimal-residual estimation from device intensities.

The measured calibration signals (s_z, s_x) are matched against model
signals assembled from the calibration table, by unweighted least squares
over (phi, delta).
"""
from typing import Dict, Optional
import numpy as np
from scipy.optimize import minimize
from loguru import logger

from src.config import load_simulation_config
from src.exceptions import EstimationError, InvalidParameterError
from src.device import CalibrationTable, IntensityRecord
from .likelihood import EDGE_TOL, TRAP_RUNNER_UP, Estimate, is_trapped, wrap_phase

# Objective for model points where output 1 is dark
DARK_PENALTY = 1e6


class ResidualEstimator:
    """Least-squares fit of (phi, delta) to calibration signals."""

    def __init__(self, calibration: CalibrationTable, config: Dict = None):
        """
        Initialize estimator.

        Args:
            calibration: Pure-state calibration table of the device
            config: Estimator configuration (``estimator`` section)
        """
        if calibration is None or len(calibration) == 0:
            raise InvalidParameterError("Calibration table is empty")
        if config is None:
            config = load_simulation_config().get("estimator", {})
        self.calibration = calibration
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

        logger.info(f"ResidualEstimator initialized with {len(calibration)} calibration rows")

    def _residual(self, phi, delta, s_z: float, s_x: float) -> np.ndarray:
        m_z, m_x = self.calibration.model_signals(phi, delta)
        r = (m_z - s_z) ** 2
        if np.isfinite(s_x):
            r = r + (m_x - s_x) ** 2
        return np.where(np.isfinite(r), r, DARK_PENALTY)

    def estimate(self, record: IntensityRecord) -> Estimate:
        """
        Estimate (phi, delta) from one intensity record.

        ``log_likelihood`` carries minus the residual.
        """
        s_z, s_x = record.signals()
        if not np.isfinite(s_z):
            raise InvalidParameterError("Record signals are not finite")

        phis = -np.pi + 2.0 * np.pi * np.arange(1, self.grid_phi + 1) / self.grid_phi
        deltas = np.linspace(self.delta_min, self.delta_max, self.grid_delta)
        values = self._residual(phis[:, None], deltas[None, :], s_z, s_x)
        order = np.argsort(values, axis=None)[: self.n_starts]
        start_deltas = [float(deltas[np.unravel_index(k, values.shape)[1]]) for k in order]

        d_phi = 2.0 * np.pi / self.grid_phi
        d_delta = (self.delta_max - self.delta_min) / (self.grid_delta - 1)

        def objective(x: np.ndarray) -> float:
            return float(self._residual(x[0], x[1], s_z, s_x))

        best = None
        evaluations = int(values.size)
        for k in order:
            i, j = np.unravel_index(k, values.shape)
            x0 = np.array([phis[i], deltas[j]])
            step_delta = 0.5 * d_delta if x0[1] + 0.5 * d_delta <= self.delta_max else -0.5 * d_delta
            simplex = np.array([x0, x0 + [0.5 * d_phi, 0.0], x0 + [0.0, step_delta]])
            result = minimize(
                objective,
                x0,
                method="Nelder-Mead",
                bounds=[(None, None), (self.delta_min, self.delta_max)],
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
                logger.warning(f"Residual refinement did not converge from {x0}: {result.message}")
            if np.isfinite(result.fun) and (best is None or result.fun < best.fun):
                best = result

        if best is None:
            raise EstimationError("Residual minimisation produced no finite optimum")

        delta_hat = float(np.clip(best.x[1], self.delta_min, self.delta_max))
        return Estimate(
            phi_hat=wrap_phase(best.x[0]),
            delta_hat=delta_hat,
            converged=bool(best.success),
            log_likelihood=-float(best.fun),
            trapped_at_zero=is_trapped(delta_hat, start_deltas, self.trap_threshold, self.trap_runner_up),
            at_domain_edge=bool(delta_hat >= self.delta_max - EDGE_TOL),
            n_evaluations=evaluations,
        )


def residual_estimate(
    record: IntensityRecord,
    calibration: CalibrationTable,
    config: Optional[Dict] = None
) -> Estimate:
    """Functional wrapper around ``ResidualEstimator.estimate``."""
    return ResidualEstimator(calibration, config).estimate(record)
