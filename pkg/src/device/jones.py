"""
Jones calculus for the polarisation Sagnac device.

Amplitudes are (H, V) pairs. HWP1 at angle alpha prepares linear
polarisation c_H = cos 2 alpha, c_V = sin 2 alpha. In the circular basis
this is a qubit with Bloch phase phi = -4 alpha, so horizontal input is
phi = 0.
"""
from typing import Tuple
import numpy as np

from src.exceptions import InvalidParameterError
from src.qubit import ComplexMatrix2, QubitState, pauli

OMEGA_MAX_DEG = 22.5
NORMALIZATION_TOL = 1e-10

# Circular (qubit) basis -> H/V basis
CIRCULAR_TO_LINEAR = np.array([[1.0, 1.0], [-1j, 1j]], dtype=complex) / np.sqrt(2)

PLUS_45 = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
MINUS_45 = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)


def _check_omega(omega_deg: float) -> float:
    if not np.isfinite(omega_deg) or omega_deg < 0 or omega_deg > OMEGA_MAX_DEG:
        raise InvalidParameterError(
            f"HWP2 angle must lie in [0, {OMEGA_MAX_DEG}] degrees, got {omega_deg}"
        )
    return float(omega_deg)


def hwp_to_theta(omega_deg: float) -> float:
    """Measurement strength theta = pi/2 - 4 omega, in radians."""
    omega = np.radians(_check_omega(omega_deg))
    return float(max(np.pi / 2 - 4.0 * omega, 0.0))


def theta_to_hwp(theta: float) -> float:
    """Inverse of ``hwp_to_theta``, in degrees."""
    if theta < 0 or theta > np.pi / 2 + 1e-12:
        raise InvalidParameterError(f"theta must lie in [0, pi/2], got {theta}")
    return float(np.degrees((np.pi / 2 - theta) / 4.0))


def jones_outputs(omega_deg: float) -> Tuple[ComplexMatrix2, ComplexMatrix2]:
    """
    Jones matrices of the two device outputs.

    Returns:
        Tuple (J1, J2) with J1 = diag(cos 2w, sin 2w) and
        J2 = sigma_x diag(sin 2w, cos 2w)
    """
    omega = np.radians(_check_omega(omega_deg))
    c, s = np.cos(2 * omega), np.sin(2 * omega)
    j1 = np.diag([c, s]).astype(complex)
    j2 = pauli("x") @ np.diag([s, c]).astype(complex)
    return j1, j2


def half_wave_plate(angle_deg: float) -> ComplexMatrix2:
    """Jones matrix of a half-wave plate with its fast axis at ``angle_deg``."""
    a = np.radians(2.0 * angle_deg)
    return np.array([[np.cos(a), np.sin(a)], [np.sin(a), -np.cos(a)]], dtype=complex)


def hwp1_amplitudes(alpha_deg: float) -> np.ndarray:
    """(c_H, c_V) prepared by HWP1 at ``alpha_deg`` from horizontal light."""
    return half_wave_plate(alpha_deg) @ np.array([1.0, 0.0], dtype=complex)


def normalized_amplitudes(amplitudes) -> np.ndarray:
    """Validate |c_H|^2 + |c_V|^2 = 1."""
    psi = np.asarray(amplitudes, dtype=complex)
    if psi.shape != (2,):
        raise InvalidParameterError(f"Expected two amplitudes, got shape {psi.shape}")
    norm = float(np.real(np.vdot(psi, psi)))
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise InvalidParameterError(f"Input polarisation is not normalized: |c|^2 = {norm:.12f}")
    return psi


def polarisation_density(state: QubitState) -> ComplexMatrix2:
    """Map a circular-basis qubit state to its H/V polarisation density."""
    u = CIRCULAR_TO_LINEAR
    return u @ state.density @ u.conj().T


def alpha_for_phase(phi: float) -> float:
    """HWP1 angle (degrees) that prepares the pure state of phase ``phi``."""
    return float(-np.degrees(phi) / 4.0)


def phase_for_alpha(alpha_deg: float) -> float:
    """Phase (radians) prepared by HWP1 at ``alpha_deg``."""
    return float(-4.0 * np.radians(alpha_deg))
