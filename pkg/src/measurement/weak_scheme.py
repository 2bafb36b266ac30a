"""
Four-outcome weak measurement scheme.

A weak measurement of strength theta along the strength axis is followed by
a projective measurement. In the package's Bloch convention the combined
effects are E(w, s) = (I + n.sigma)/4 with n = s (sin theta, -w cos theta, 0),
which gives p(w, s) = (1 + s exp(-delta^2) sin(theta - w phi))/4.
"""
from typing import Tuple
import numpy as np

from src.exceptions import InvalidParameterError
from src.qubit import ComplexMatrix2, pauli
from src.estimation import FisherMatrix
from .povm import MeasurementStrength, Povm, projector_along

# (w, s) in effect order
OUTCOME_LABELS = ("++", "+-", "-+", "--")
OUTCOME_SIGNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

# cos(pi/2) rounds to ~6e-17, so anything this small is an exact zero
DENOMINATOR_FLOOR = 1e-24


def weak_operators(theta) -> Tuple[ComplexMatrix2, ComplexMatrix2]:
    """
    Kraus operators M_(+/-) = (cos(theta/2) I +/- sin(theta/2) sigma_z) / sqrt(2).

    Returns:
        Tuple (M_plus, M_minus); M+^dag M+ + M-^dag M- = I
    """
    theta = MeasurementStrength.coerce(theta).theta
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m_plus = (c * pauli(0) + s * pauli("z")) / np.sqrt(2)
    m_minus = (c * pauli(0) - s * pauli("z")) / np.sqrt(2)
    return m_plus, m_minus


def effect_direction(w: int, s: int, theta: float) -> np.ndarray:
    """Unit Bloch direction of E(w, s)."""
    return s * np.array([np.sin(theta), -w * np.cos(theta), 0.0])


def weak_scheme_povm(theta) -> Povm:
    """The four rank-1 effects E(w, s), each with eigenvalues {1/2, 0}."""
    theta = MeasurementStrength.coerce(theta).theta
    return Povm([
        projector_along(effect_direction(w, s, theta), weight=0.5, label=label)
        for label, (w, s) in zip(OUTCOME_LABELS, OUTCOME_SIGNS)
    ])


def outcome_probabilities(phi, delta, theta) -> np.ndarray:
    """
    Outcome distribution of the weak scheme.

    Args:
        phi: Phase (scalar or array)
        delta: Diffusion amplitude >= 0 (scalar or array)
        theta: Measurement strength in [0, pi/2]

    Returns:
        Array with a trailing axis of length 4 in ``OUTCOME_LABELS`` order
    """
    theta = MeasurementStrength.coerce(theta).theta
    phi = np.asarray(phi, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise InvalidParameterError("delta must be >= 0")

    q = np.exp(-delta * delta)
    return np.stack(
        [0.25 * (1.0 + s * q * np.sin(theta - w * phi)) for w, s in OUTCOME_SIGNS],
        axis=-1,
    )


def weak_model(theta):
    """Outcome model ``(phi, delta) -> p`` at fixed strength, for Fisher routines."""
    theta = MeasurementStrength.coerce(theta).theta

    def model(phi: float, delta: float) -> np.ndarray:
        return outcome_probabilities(phi, abs(delta), theta)

    return model


def fisher_components(phi, delta, theta):
    """
    Closed-form Fisher entries of the weak scheme, broadcasting over inputs.

    Per weak branch w, with C = cos(theta - w phi), S = sin(theta - w phi)
    and q = exp(-delta^2):
        F_pp += q^2 C^2 / (2 (1 - q^2 S^2))
        F_dd += 2 delta^2 q^2 S^2 / (1 - q^2 S^2)
        F_pd += w delta q^2 C S / (1 - q^2 S^2)
    A branch whose denominator vanishes (pure state measured along its own
    axis) contributes zero, as its numerators do.
    """
    theta = MeasurementStrength.coerce(theta).theta
    phi = np.asarray(phi, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise InvalidParameterError("delta must be >= 0")

    q2 = np.exp(-2.0 * delta * delta)
    # 1 - q^2 S^2 written as (1 - q^2) + q^2 C^2
    gap = -np.expm1(-2.0 * delta * delta)

    f_pp = np.zeros(np.broadcast(phi, delta).shape)
    f_dd = np.zeros_like(f_pp)
    f_pd = np.zeros_like(f_pp)
    for w in (1, -1):
        c = np.cos(theta - w * phi)
        s = np.sin(theta - w * phi)
        denom = gap + q2 * c * c
        ok = denom > DENOMINATOR_FLOOR
        safe = np.where(ok, denom, 1.0)
        f_pp = f_pp + np.where(ok, 0.5 * q2 * c * c / safe, 0.0)
        f_dd = f_dd + np.where(ok, 2.0 * delta * delta * q2 * s * s / safe, 0.0)
        f_pd = f_pd + np.where(ok, w * delta * q2 * c * s / safe, 0.0)
    return f_pp, f_dd, f_pd


def analytic_fisher(phi: float, delta: float, theta) -> FisherMatrix:
    """Closed-form Fisher matrix of the weak scheme at a single point."""
    f_pp, f_dd, f_pd = fisher_components(phi, delta, theta)
    return FisherMatrix(f_pp=float(f_pp), f_dd=float(f_dd), f_pd=float(f_pd))


def projective_mixture_povm(t: float) -> Povm:
    """
    Random choice between two projective measurements.

    With probability ``t`` measure along the phase-sensitive y axis, otherwise
    along the coherence-sensitive x axis. Zero-weight effects are dropped.
    """
    if not np.isfinite(t) or t < 0 or t > 1:
        raise InvalidParameterError(f"t must lie in [0, 1], got {t}")

    effects = []
    if t > 0:
        effects.append(projector_along((0.0, 1.0, 0.0), weight=t, label="y+"))
        effects.append(projector_along((0.0, -1.0, 0.0), weight=t, label="y-"))
    if t < 1:
        effects.append(projector_along((1.0, 0.0, 0.0), weight=1.0 - t, label="x+"))
        effects.append(projector_along((-1.0, 0.0, 0.0), weight=1.0 - t, label="x-"))
    return Povm(effects)


def merged_povm(theta) -> Povm:
    """Three-outcome scheme of the interferometer: (+,+), (-,+) and both s = - outcomes."""
    return weak_scheme_povm(theta).merge({"*-": ["+-", "--"]})

