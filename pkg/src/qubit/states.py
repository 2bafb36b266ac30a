"""
Qubit states and the phase + phase-diffusion channel.

Bloch convention used everywhere in the package:
rho = (I + r.sigma)/2, so rho[0, 1] = (r_x - i r_y)/2. The dephased probe
therefore has r = exp(-delta^2) * (cos phi, sin phi, 0).
"""
from dataclasses import dataclass, field
from typing import Tuple
import numpy as np

from src.exceptions import InvalidParameterError
from .linalg import ComplexMatrix2, as_matrix2, hermitian_eig2, hermiticity_error, pauli

STATE_TOL = 1e-12


def coherence(delta: float) -> float:
    """Length of the Bloch vector after phase diffusion of width ``delta``."""
    return float(np.exp(-delta * delta))


@dataclass(frozen=True)
class BlochVector:
    """Real Bloch vector of a qubit state."""
    r_x: float
    r_y: float
    r_z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.r_x, self.r_y, self.r_z])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


@dataclass(frozen=True, eq=False)
class QubitState:
    """
    Validated 2x2 density matrix.

    The stored array is a read-only copy; construction fails when the matrix
    is not Hermitian, not unit-trace or not positive semidefinite within
    ``STATE_TOL``.
    """
    density: ComplexMatrix2 = field(repr=False)

    def __post_init__(self):
        rho = np.array(as_matrix2(self.density), copy=True)
        herm = hermiticity_error(rho)
        if herm > STATE_TOL:
            raise InvalidParameterError(f"Density matrix is not Hermitian (deviation {herm:.3e})")
        trace = np.trace(rho)
        if abs(trace - 1.0) > STATE_TOL:
            raise InvalidParameterError(f"Density matrix trace is {trace.real:.15f}, expected 1")
        values, _ = hermitian_eig2(rho, tol=STATE_TOL)
        if values[-1] < -STATE_TOL:
            raise InvalidParameterError(f"Density matrix has negative eigenvalue {values[-1]:.3e}")
        rho.setflags(write=False)
        object.__setattr__(self, "density", rho)

    def eigenvalues(self) -> np.ndarray:
        return hermitian_eig2(self.density, tol=STATE_TOL)[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.density @ self.density)))

    def expectation(self, operator: ComplexMatrix2) -> float:
        """Real part of Tr[rho A]."""
        return float(np.real(np.trace(self.density @ as_matrix2(operator))))

    def bloch(self) -> BlochVector:
        return bloch_from_state(self)


def dephased_state(phi: float, delta: float) -> QubitState:
    """
    Output of the phase + phase-diffusion channel on the optimal probe.

    Args:
        phi: Mean phase shift in radians
        delta: Phase-diffusion amplitude (not its square), must be >= 0

    Returns:
        State with diagonal 1/2 and rho[0, 1] = exp(-i phi - delta^2)/2
    """
    if delta < 0:
        raise InvalidParameterError(f"delta must be >= 0, got {delta}")
    off = 0.5 * np.exp(-1j * phi - delta * delta)
    rho = np.array([[0.5, off], [np.conj(off), 0.5]], dtype=complex)
    return QubitState(rho)


def dephased_state_derivatives(phi: float, delta: float) -> Tuple[ComplexMatrix2, ComplexMatrix2]:
    """
    Exact partial derivatives of the dephased state.

    Returns:
        Tuple (d rho / d phi, d rho / d delta), both Hermitian and traceless
    """
    if delta < 0:
        raise InvalidParameterError(f"delta must be >= 0, got {delta}")
    off = 0.5 * np.exp(-1j * phi - delta * delta)
    d_phi_off = -1j * off
    d_delta_off = -2.0 * delta * off
    d_phi = np.array([[0.0, d_phi_off], [np.conj(d_phi_off), 0.0]], dtype=complex)
    d_delta = np.array([[0.0, d_delta_off], [np.conj(d_delta_off), 0.0]], dtype=complex)
    return d_phi, d_delta


def maximally_mixed() -> QubitState:
    return QubitState(0.5 * pauli(0))


def bloch_from_state(state: QubitState) -> BlochVector:
    """r_k = Tr[rho sigma_k]."""
    return BlochVector(
        r_x=state.expectation(pauli("x")),
        r_y=state.expectation(pauli("y")),
        r_z=state.expectation(pauli("z")),
    )


def state_from_bloch(vector: BlochVector) -> QubitState:
    """Inverse of ``bloch_from_state``; rejects vectors outside the unit ball."""
    norm = vector.norm()
    if norm > 1.0 + STATE_TOL:
        raise InvalidParameterError(f"Bloch vector norm {norm:.15f} exceeds 1")
    rho = 0.5 * (
        pauli(0)
        + vector.r_x * pauli("x")
        + vector.r_y * pauli("y")
        + vector.r_z * pauli("z")
    )
    return QubitState(rho)
