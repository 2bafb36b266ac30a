"""
Exact 2x2 complex linear algebra.
Pauli algebra and closed-form Hermitian eigen-decomposition for single qubits.
"""
from typing import Callable, Tuple, Union
import numpy as np
from loguru import logger

from src.exceptions import InvalidParameterError

# Row-major 2x2 complex array
ComplexMatrix2 = np.ndarray

PauliIndex = Union[int, str]

_PAULI = {
    "0": np.array([[1, 0], [0, 1]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_PAULI_ALIASES = {
    0: "0", "0": "0", "i": "0", "I": "0",
    1: "x", "x": "x", "X": "x",
    2: "y", "y": "y", "Y": "y",
    3: "z", "z": "z", "Z": "z",
}


def pauli(index: PauliIndex) -> ComplexMatrix2:
    """
    Return a Pauli matrix.

    Args:
        index: One of 0/x/y/z (also 1/2/3 and upper-case labels)

    Returns:
        Fresh 2x2 complex array; ``pauli(0)`` is the identity
    """
    key = _PAULI_ALIASES.get(index)
    if key is None:
        raise InvalidParameterError(f"Unknown Pauli index: {index!r}")
    return _PAULI[key].copy()


def identity() -> ComplexMatrix2:
    """2x2 identity."""
    return pauli(0)


def as_matrix2(m) -> ComplexMatrix2:
    """Coerce to a 2x2 complex array, rejecting other shapes."""
    arr = np.asarray(m, dtype=complex)
    if arr.shape != (2, 2):
        raise InvalidParameterError(f"Expected a 2x2 matrix, got shape {arr.shape}")
    return arr


def dagger(m: ComplexMatrix2) -> ComplexMatrix2:
    """Conjugate transpose."""
    return np.conj(as_matrix2(m)).T


def hermiticity_error(m: ComplexMatrix2) -> float:
    """Largest entrywise deviation of ``m`` from its conjugate transpose."""
    m = as_matrix2(m)
    return float(np.max(np.abs(m - m.conj().T)))


def require_hermitian(m: ComplexMatrix2, tol: float = 1e-10, name: str = "matrix") -> ComplexMatrix2:
    """Return ``m`` as an array, raising if it is not Hermitian within ``tol``."""
    m = as_matrix2(m)
    err = hermiticity_error(m)
    if err > tol:
        raise InvalidParameterError(f"{name} is not Hermitian (deviation {err:.3e})")
    return m


def pauli_components(m: ComplexMatrix2) -> Tuple[float, np.ndarray]:
    """
    Decompose a Hermitian matrix as ``a*I + b.sigma``.

    Returns:
        Tuple of the real scalar ``a`` and the real 3-vector ``b``
    """
    m = as_matrix2(m)
    a = 0.5 * float(np.real(m[0, 0] + m[1, 1]))
    off = 0.5 * (m[0, 1] + np.conj(m[1, 0]))
    b = np.array([
        float(np.real(off)),
        float(-np.imag(off)),
        0.5 * float(np.real(m[0, 0] - m[1, 1])),
    ])
    return a, b


def hermitian_eig2(
    m: ComplexMatrix2,
    tol: float = 1e-10
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Closed-form spectral decomposition of a 2x2 Hermitian matrix.

    Args:
        m: Hermitian 2x2 matrix
        tol: Allowed deviation from Hermiticity

    Returns:
        Eigenvalues sorted descending and a unitary whose columns are the
        matching eigenvectors. Degenerate input returns the canonical basis.
    """
    m = require_hermitian(m, tol=tol)
    a, b = pauli_components(m)
    r = float(np.linalg.norm(b))

    if r < 1e-15:
        logger.debug("hermitian_eig2: degenerate spectrum, returning canonical basis")
        return np.array([a, a]), np.eye(2, dtype=complex)

    nx, ny, nz = b / r
    # Eigenvector along the Bloch direction of b; pick the better-conditioned column
    if nz >= 0:
        v_plus = np.array([1.0 + nz, nx + 1j * ny], dtype=complex)
    else:
        v_plus = np.array([nx - 1j * ny, 1.0 - nz], dtype=complex)
    v_plus /= np.linalg.norm(v_plus)
    v_minus = np.array([-np.conj(v_plus[1]), np.conj(v_plus[0])], dtype=complex)

    vectors = np.column_stack([v_plus, v_minus])
    return np.array([a + r, a - r]), vectors


def hermitian_function(
    m: ComplexMatrix2,
    func: Callable[[np.ndarray], np.ndarray],
    tol: float = 1e-10
) -> ComplexMatrix2:
    """Apply ``func`` to the spectrum of a Hermitian matrix."""
    values, vectors = hermitian_eig2(m, tol=tol)
    return vectors @ np.diag(func(values)) @ vectors.conj().T
