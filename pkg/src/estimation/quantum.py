"""
Quantum Fisher information.
Symmetric logarithmic derivatives, the numeric QFI matrix of the dephased
state, its closed form and the Bloch-vector oracle.
"""
from typing import Sequence, Dict
import numpy as np
from loguru import logger

from src.config import settings
from src.exceptions import InvalidParameterError, NonIdentifiableError
from src.qubit import (
    ComplexMatrix2,
    QubitState,
    coherence,
    dephased_state,
    dephased_state_derivatives,
    hermitian_eig2,
)
from src.qubit.linalg import require_hermitian
from .schema import PARAMETERS, ParamPoint, QfiMatrix

SLD_CUTOFF = 1e-12


def sld(
    rho: QubitState,
    drho: ComplexMatrix2,
    tol: float = 1e-10,
    cutoff: float = SLD_CUTOFF
) -> ComplexMatrix2:
    """
    Solve L rho + rho L = 2 drho in the eigenbasis of rho.

    L_ij = 2 <i|drho|j> / (lambda_i + lambda_j); pairs with
    lambda_i + lambda_j < ``cutoff`` are dropped.
    """
    drho = require_hermitian(drho, tol=tol, name="drho")
    trace = np.trace(drho)
    if abs(trace) > tol:
        raise InvalidParameterError(f"drho must be traceless, trace = {trace:.3e}")

    values, vectors = hermitian_eig2(rho.density)
    d = vectors.conj().T @ drho @ vectors
    denom = values[:, None] + values[None, :]
    keep = denom >= cutoff
    l_eig = np.zeros((2, 2), dtype=complex)
    l_eig[keep] = 2.0 * d[keep] / denom[keep]
    return vectors @ l_eig @ vectors.conj().T


def qfi_from_slds(rho: QubitState, slds: Sequence[ComplexMatrix2]) -> np.ndarray:
    """H_ij = Re Tr[rho L_i L_j]."""
    n = len(slds)
    h = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            h[i, j] = float(np.real(np.trace(rho.density @ slds[i] @ slds[j])))
    return 0.5 * (h + h.T)


def _channel_density(phi: float, delta: float) -> np.ndarray:
    # The channel depends on delta only through delta^2, so negative
    # stencil points are evaluated at |delta|.
    return dephased_state(phi, abs(delta)).density


def numeric_derivatives(point: ParamPoint, step: float):
    """Central-difference d rho / d phi and d rho / d delta."""
    phi, delta = point.phi, point.delta
    d_phi = (_channel_density(phi + step, delta) - _channel_density(phi - step, delta)) / (2 * step)
    d_delta = (_channel_density(phi, delta + step) - _channel_density(phi, delta - step)) / (2 * step)
    # Differences of Hermitian matrices are Hermitian up to rounding
    d_phi = 0.5 * (d_phi + d_phi.conj().T)
    d_delta = 0.5 * (d_delta + d_delta.conj().T)
    return d_phi, d_delta


def qfi_matrix(
    point: ParamPoint,
    step: float = None,
    parameters: Sequence[str] = PARAMETERS
) -> QfiMatrix:
    """
    QFI matrix of the dephased state from numerically differentiated SLDs.

    Args:
        point: Parameter point
        step: Central-difference step (defaults to ``settings.fd_step``)
        parameters: Subset of ("phi", "delta") to evaluate; at delta = 0 only
            "phi" is available

    Returns:
        QfiMatrix; entries that were not requested are NaN
    """
    step = settings.fd_step if step is None else step
    if step <= 0:
        raise InvalidParameterError(f"step must be > 0, got {step}")
    unknown = set(parameters) - set(PARAMETERS)
    if unknown:
        raise InvalidParameterError(f"Unknown parameters: {sorted(unknown)}")
    if point.delta == 0 and "delta" in parameters:
        raise NonIdentifiableError(
            "QFI for delta is undefined at delta = 0 (pure state, rank change); request phi only"
        )

    rho = dephased_state(point.phi, point.delta)
    d_phi, d_delta = numeric_derivatives(point, step)

    h_pp = h_dd = h_pd = float("nan")
    l_phi = sld(rho, d_phi) if "phi" in parameters else None
    l_delta = sld(rho, d_delta) if "delta" in parameters else None

    if l_phi is not None:
        h_pp = qfi_from_slds(rho, [l_phi])[0, 0]
    if l_delta is not None:
        h_dd = qfi_from_slds(rho, [l_delta])[0, 0]
    if l_phi is not None and l_delta is not None:
        h_pd = qfi_from_slds(rho, [l_phi, l_delta])[0, 1]

    return QfiMatrix(h_pp=float(h_pp), h_dd=float(h_dd), h_pd=float(h_pd))


def qfi_closed_form(delta: float) -> QfiMatrix:
    """
    H_phiphi = exp(-2 delta^2), H_deltadelta = 4 delta^2 / (exp(2 delta^2) - 1).

    The delta = 0 value of H_deltadelta is its continuous limit, 2.
    """
    if delta < 0:
        raise InvalidParameterError(f"delta must be >= 0, got {delta}")
    x = 2.0 * delta * delta
    h_dd = 2.0 if x == 0 else 2.0 * x / np.expm1(x)
    return QfiMatrix(h_pp=float(np.exp(-x)), h_dd=float(h_dd), h_pd=0.0)


def plus_one_h_dd(delta: float) -> float:
    """The "+1" denominator variant 4 delta^2 / (exp(2 delta^2) + 1)."""
    return float(4.0 * delta * delta / (np.exp(2.0 * delta * delta) + 1.0))


def h_dd_discrepancy(delta: float) -> Dict[str, float]:
    """
    Compare the corrected H_deltadelta with the "+1" denominator variant.

    The SLD solution, the saturation identity of the weak scheme and the
    strong-measurement limit of F_deltadelta all require the "-1"
    denominator; the "+1" form is kept only for reporting.
    """
    corrected = qfi_closed_form(delta).h_dd
    plus_one = plus_one_h_dd(delta)
    deviation = corrected - plus_one
    if delta > 0 and abs(deviation) > 1e-12:
        logger.warning(
            f"H_deltadelta at delta={delta}: corrected {corrected:.9f} vs '+1' form {plus_one:.9f}"
        )
    return {"corrected": corrected, "plus_one": plus_one, "deviation": deviation}


def qubit_qfi_from_bloch(point: ParamPoint) -> QfiMatrix:
    """
    Qubit QFI from the Bloch vector: dr_i.dr_j + (r.dr_i)(r.dr_j) / (1 - |r|^2).

    Independent of the SLD solver; requires delta > 0 (mixed state).
    """
    if point.delta == 0:
        raise NonIdentifiableError("Bloch-vector QFI formula needs a mixed state (delta > 0)")
    q = coherence(point.delta)
    c, s = np.cos(point.phi), np.sin(point.phi)
    r = q * np.array([c, s, 0.0])
    dr = [
        q * np.array([-s, c, 0.0]),
        -2.0 * point.delta * r,
    ]
    purity_gap = -np.expm1(-2.0 * point.delta ** 2)
    h = np.array([
        [dr[i] @ dr[j] + (r @ dr[i]) * (r @ dr[j]) / purity_gap for j in range(2)]
        for i in range(2)
    ])
    return QfiMatrix(h_pp=float(h[0, 0]), h_dd=float(h[1, 1]), h_pd=float(h[0, 1]))


def exact_qfi_matrix(point: ParamPoint) -> QfiMatrix:
    """QFI from SLDs of the exact state derivatives."""
    if point.delta == 0:
        raise NonIdentifiableError("QFI for delta is undefined at delta = 0")
    rho = dephased_state(point.phi, point.delta)
    d_phi, d_delta = dephased_state_derivatives(point.phi, point.delta)
    h = qfi_from_slds(rho, [sld(rho, d_phi), sld(rho, d_delta)])
    return QfiMatrix(h_pp=float(h[0, 0]), h_dd=float(h[1, 1]), h_pd=float(h[0, 1]))
