"""
Classical Fisher information and Cramer-Rao machinery.
Finite-difference Fisher matrices of arbitrary outcome models, exact Fisher
matrices of POVMs on the dephased state, effective Fisher information and
the trade-off ratios.
"""
from typing import Callable, NamedTuple, Optional, Sequence
import numpy as np
from loguru import logger

from src.config import settings
from src.exceptions import InvalidParameterError, NonIdentifiableError
from src.qubit import dephased_state, dephased_state_derivatives
from .schema import CovarianceBound, FisherMatrix, ParamPoint, QfiMatrix

# Outcome model: (phi, delta) -> probability vector
OutcomeModel = Callable[[float, float], np.ndarray]

PROBABILITY_FLOOR = 1e-14
NORMALIZATION_TOL = 1e-8
SINGULAR_DET = 1e-14


class TradeoffRatios(NamedTuple):
    r_phi: float
    r_delta: float
    total: float


def _evaluate(model: OutcomeModel, phi: float, delta: float) -> np.ndarray:
    return np.asarray(model(phi, delta), dtype=float)


def _partials(
    model: OutcomeModel,
    point: ParamPoint,
    step: float
) -> np.ndarray:
    """Second-order finite-difference partials, shape (2, n_outcomes)."""
    phi, delta = point.phi, point.delta
    d_phi = (_evaluate(model, phi + step, delta) - _evaluate(model, phi - step, delta)) / (2 * step)

    if delta - step >= 0:
        d_delta = (_evaluate(model, phi, delta + step) - _evaluate(model, phi, delta - step)) / (2 * step)
    else:
        # delta sits at the boundary; use the three-point forward stencil
        logger.debug(f"fisher_from_model: forward differences in delta at delta={delta}")
        f0 = _evaluate(model, phi, delta)
        f1 = _evaluate(model, phi, delta + step)
        f2 = _evaluate(model, phi, delta + 2 * step)
        d_delta = (-3 * f0 + 4 * f1 - f2) / (2 * step)

    return np.vstack([d_phi, d_delta])


def fisher_from_partials(
    probabilities: np.ndarray,
    partials: np.ndarray,
    floor: float = PROBABILITY_FLOOR
) -> FisherMatrix:
    """
    Assemble F_ab = sum_x (d_a p)(d_b p) / p.

    Outcomes with p < ``floor`` are skipped; their contribution vanishes as
    p -> 0 for the smooth models handled here.
    """
    p = np.asarray(probabilities, dtype=float)
    keep = p >= floor
    if not np.all(keep):
        logger.debug(f"Skipping {int(np.sum(~keep))} outcome(s) below probability floor {floor}")
    d = partials[:, keep]
    matrix = (d / p[keep]) @ d.T
    return FisherMatrix.from_array(matrix)


def fisher_from_model(
    model: OutcomeModel,
    point: ParamPoint,
    step: Optional[float] = None,
    richardson: bool = False,
    floor: float = PROBABILITY_FLOOR
) -> FisherMatrix:
    """
    Classical Fisher matrix of an outcome model by central differences.

    Args:
        model: Callable mapping (phi, delta) to a normalized probability vector
        point: Parameter point
        step: Difference step (defaults to ``settings.fd_step``)
        richardson: Combine steps h and h/2 to cancel the O(h^2) error
        floor: Probability below which an outcome is skipped

    Returns:
        FisherMatrix at ``point``
    """
    step = settings.fd_step if step is None else step
    if step <= 0:
        raise InvalidParameterError(f"step must be > 0, got {step}")

    p = _evaluate(model, point.phi, point.delta)
    total = float(np.sum(p))
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise InvalidParameterError(f"Model is not normalized at {point}: sum = {total:.12f}")
    if np.any(p < -NORMALIZATION_TOL):
        raise InvalidParameterError(f"Model returned negative probabilities at {point}")

    partials = _partials(model, point, step)
    if richardson:
        partials = (4 * _partials(model, point, step / 2) - partials) / 3

    return fisher_from_partials(p, partials, floor=floor)


def povm_fisher(
    effects: Sequence[np.ndarray],
    point: ParamPoint,
    floor: float = PROBABILITY_FLOOR
) -> FisherMatrix:
    """
    Exact Fisher matrix of a POVM measured on the dephased state.

    Uses the analytic state derivatives, so no difference step is involved.
    """
    rho = dephased_state(point.phi, point.delta).density
    d_phi, d_delta = dephased_state_derivatives(point.phi, point.delta)

    p = np.array([np.real(np.trace(rho @ e)) for e in effects])
    partials = np.array([
        [np.real(np.trace(d_phi @ e)) for e in effects],
        [np.real(np.trace(d_delta @ e)) for e in effects],
    ])
    return fisher_from_partials(p, partials, floor=floor)


def effective_fisher(fisher: FisherMatrix):
    """
    Effective Fisher information F'_ii = 1 / (F^-1)_ii.

    Returns:
        Tuple (F'_phiphi, F'_deltadelta)
    """
    if fisher.f_pd == 0.0:
        return fisher.f_pp, fisher.f_dd

    det = fisher.f_pp * fisher.f_dd - fisher.f_pd ** 2
    if det <= SINGULAR_DET:
        raise NonIdentifiableError(
            f"Fisher matrix is singular (det={det:.3e}) with nonzero correlation {fisher.f_pd:.3e}"
        )
    return det / fisher.f_dd, det / fisher.f_pp


def tradeoff_ratios(
    fisher: FisherMatrix,
    qfi: QfiMatrix,
    effective: bool = False
) -> TradeoffRatios:
    """F_ii / H_ii (or F'_ii / H_ii) and their sum, bounded by 1 for any qubit POVM."""
    if qfi.h_pp <= 0 or qfi.h_dd <= 0:
        raise InvalidParameterError(f"QFI diagonal must be positive, got ({qfi.h_pp}, {qfi.h_dd})")

    if effective:
        f_pp, f_dd = effective_fisher(fisher)
    else:
        f_pp, f_dd = fisher.f_pp, fisher.f_dd

    r_phi = f_pp / qfi.h_pp
    r_delta = f_dd / qfi.h_dd
    return TradeoffRatios(r_phi, r_delta, r_phi + r_delta)


def crb_covariance(fisher: FisherMatrix, shots: int) -> CovarianceBound:
    """Cramer-Rao bound F^-1 / M."""
    if int(shots) != shots or shots < 1:
        raise InvalidParameterError(f"shots must be a positive integer, got {shots}")

    det = fisher.f_pp * fisher.f_dd - fisher.f_pd ** 2
    if det <= SINGULAR_DET:
        raise NonIdentifiableError(f"Fisher matrix is singular (det={det:.3e})")

    return CovarianceBound(
        var_phi=fisher.f_dd / (det * shots),
        var_delta=fisher.f_pp / (det * shots),
        cov=-fisher.f_pd / (det * shots),
        shots=int(shots),
    )
