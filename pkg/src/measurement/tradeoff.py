"""
Trade-off scans of the weak scheme.
How the measurement strength splits the available quantum Fisher
information between phase and phase diffusion.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple
import numpy as np
import pandas as pd
from loguru import logger

from src.exceptions import InvalidParameterError, NonIdentifiableError
from src.estimation import effective_fisher, qfi_closed_form, tradeoff_ratios
from .povm import HALF_PI
from .weak_scheme import analytic_fisher, fisher_components

TRADEOFF_COLUMNS = ["theta", "ratio_phi", "ratio_delta", "ratio_sum"]


def _check_theta_grid(theta_grid) -> np.ndarray:
    grid = np.atleast_1d(np.asarray(theta_grid, dtype=float))
    if grid.size == 0:
        raise InvalidParameterError("theta grid is empty")
    if np.any(grid < 0) or np.any(grid > HALF_PI + 1e-12):
        raise InvalidParameterError("theta grid must lie within [0, pi/2]")
    return np.minimum(grid, HALF_PI)


def _check_delta_grid(delta_grid) -> np.ndarray:
    grid = np.atleast_1d(np.asarray(delta_grid, dtype=float))
    if grid.size == 0:
        raise InvalidParameterError("delta grid is empty")
    if np.any(~np.isfinite(grid)) or np.any(grid < 0):
        raise InvalidParameterError("delta grid must be finite and >= 0")
    return grid


def tradeoff_scan(delta: float, phi: float, theta_grid: Sequence[float]) -> pd.DataFrame:
    """
    Effective-Fisher ratios F'_ii / H_ii across measurement strengths.

    Args:
        delta: Diffusion amplitude (> 0)
        phi: Working phase
        theta_grid: Strengths within [0, pi/2]

    Returns:
        DataFrame with columns theta, ratio_phi, ratio_delta, ratio_sum
    """
    if not delta > 0:
        raise InvalidParameterError(f"delta must be > 0 for a trade-off scan, got {delta}")
    grid = _check_theta_grid(theta_grid)
    qfi = qfi_closed_form(delta)

    rows = []
    for theta in grid:
        fisher = analytic_fisher(phi, delta, theta)
        try:
            ratios = tradeoff_ratios(fisher, qfi, effective=True)
            r_phi, r_delta = ratios.r_phi, ratios.r_delta
        except NonIdentifiableError:
            # Rank-1 Fisher matrix: both effective informations vanish
            logger.debug(f"Singular Fisher matrix at theta={theta:.6f}, phi={phi}")
            r_phi, r_delta = 0.0, 0.0
        rows.append({
            "theta": float(theta),
            "ratio_phi": r_phi,
            "ratio_delta": r_delta,
            "ratio_sum": r_phi + r_delta,
        })

    return pd.DataFrame(rows, columns=TRADEOFF_COLUMNS)


def tradeoff_boundary(delta):
    """
    Strength theta* at which F_phiphi / H_phiphi = 1/2 for phi = 0.

    cos^2 theta* = (1 - q^2) / (2 - q^2) with q = exp(-delta^2); theta* falls
    from pi/2 at delta = 0 towards pi/4 as delta grows.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise InvalidParameterError("delta must be >= 0")
    gap = -np.expm1(-2.0 * delta * delta)
    boundary = np.arccos(np.sqrt(gap / (1.0 + gap)))
    return float(boundary) if boundary.ndim == 0 else boundary


@dataclass
class TradeoffRegion:
    """Strength/diffusion grid with the phase-favoured indicator."""
    theta: np.ndarray
    delta: np.ndarray
    # shape (len(delta), len(theta)); True where F_phiphi / H_phiphi > 1/2
    phi_favoured: np.ndarray
    boundary: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        """Long format: one row per (delta, theta) pair."""
        dd, tt = np.meshgrid(self.delta, self.theta, indexing="ij")
        return pd.DataFrame({
            "delta": dd.ravel(),
            "theta": tt.ravel(),
            "phi_favoured": self.phi_favoured.ravel(),
            "boundary_theta": np.repeat(self.boundary, len(self.theta)),
        })


def tradeoff_region(theta_grid: Sequence[float], delta_grid: Sequence[float]) -> TradeoffRegion:
    """Region of (theta, delta) where the phase gets more than half its QFI at phi = 0."""
    thetas = _check_theta_grid(theta_grid)
    deltas = _check_delta_grid(delta_grid)

    mask = np.empty((deltas.size, thetas.size), dtype=bool)
    for j, theta in enumerate(thetas):
        f_pp, _, _ = fisher_components(0.0, deltas, theta)
        mask[:, j] = f_pp / np.exp(-2.0 * deltas * deltas) > 0.5

    return TradeoffRegion(
        theta=thetas,
        delta=deltas,
        phi_favoured=mask,
        boundary=np.atleast_1d(tradeoff_boundary(deltas)),
    )


def favoured_widths(delta: float) -> Tuple[float, float]:
    """
    Widths of the strength intervals favouring each parameter at phi = 0.

    Returns:
        Tuple (phase-favoured width theta*, diffusion-favoured width pi/2 - theta*)
    """
    theta_star = tradeoff_boundary(delta)
    return theta_star, HALF_PI - theta_star
