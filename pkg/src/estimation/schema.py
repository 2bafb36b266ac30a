"""
Estimation data structures.
Parameter points and symmetric 2x2 information / covariance matrices over (phi, delta).
"""
from dataclasses import dataclass, asdict
from typing import Dict
import numpy as np

from src.exceptions import InvalidParameterError

PARAMETERS = ("phi", "delta")


@dataclass(frozen=True)
class ParamPoint:
    """Parameter pair (phi, delta)."""
    phi: float
    delta: float

    def __post_init__(self):
        if not np.isfinite(self.phi) or not np.isfinite(self.delta):
            raise InvalidParameterError(f"Non-finite parameter point: ({self.phi}, {self.delta})")
        if self.delta < 0:
            raise InvalidParameterError(f"delta must be >= 0, got {self.delta}")

    def to_dict(self) -> Dict:
        return asdict(self)


class _Symmetric2:
    """Shared helpers for the symmetric 2x2 matrices below."""

    def as_array(self) -> np.ndarray:
        raise NotImplementedError

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.as_array())[::-1]

    def is_psd(self, tol: float = 1e-9) -> bool:
        return bool(self.eigenvalues()[-1] >= -tol)

    def determinant(self) -> float:
        return float(np.linalg.det(self.as_array()))


@dataclass(frozen=True)
class FisherMatrix(_Symmetric2):
    """Classical Fisher information matrix, symmetric by construction."""
    f_pp: float
    f_dd: float
    f_pd: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.f_pp, self.f_pd], [self.f_pd, self.f_dd]])

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "FisherMatrix":
        m = np.asarray(matrix, dtype=float)
        return cls(f_pp=float(m[0, 0]), f_dd=float(m[1, 1]), f_pd=float(0.5 * (m[0, 1] + m[1, 0])))

    def scaled(self, factor: float) -> "FisherMatrix":
        return FisherMatrix(self.f_pp * factor, self.f_dd * factor, self.f_pd * factor)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class QfiMatrix(_Symmetric2):
    """Quantum Fisher information matrix built from SLD operators."""
    h_pp: float
    h_dd: float
    h_pd: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.h_pp, self.h_pd], [self.h_pd, self.h_dd]])

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class CovarianceBound(_Symmetric2):
    """Cramer-Rao lower bound F^-1 / M on the estimator covariance."""
    var_phi: float
    var_delta: float
    cov: float
    shots: int

    def as_array(self) -> np.ndarray:
        return np.array([[self.var_phi, self.cov], [self.cov, self.var_delta]])

    def correlation(self) -> float:
        return float(self.cov / np.sqrt(self.var_phi * self.var_delta))

    def to_dict(self) -> Dict:
        return asdict(self)
