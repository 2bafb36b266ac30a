"""
Generalized qubit measurements.
Effects, POVMs with completeness checks, random POVMs for bound fuzzing.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence
import numpy as np
from loguru import logger

from src.exceptions import InvalidParameterError
from src.qubit import ComplexMatrix2, QubitState, hermitian_eig2, hermitian_function, pauli
from src.qubit.linalg import require_hermitian
from src.estimation import FisherMatrix, ParamPoint, povm_fisher

HALF_PI = np.pi / 2
EFFECT_TOL = 1e-12
COMPLETENESS_TOL = 1e-10


@dataclass(frozen=True)
class MeasurementStrength:
    """Measurement strength theta in [0, pi/2]: 0 is no measurement, pi/2 projective."""
    theta: float

    def __post_init__(self):
        if not np.isfinite(self.theta) or self.theta < 0 or self.theta > HALF_PI + 1e-12:
            raise InvalidParameterError(f"theta must lie in [0, pi/2], got {self.theta}")
        object.__setattr__(self, "theta", float(min(self.theta, HALF_PI)))

    @classmethod
    def coerce(cls, value) -> "MeasurementStrength":
        return value if isinstance(value, cls) else cls(float(value))

    @property
    def degrees(self) -> float:
        return float(np.degrees(self.theta))


@dataclass(frozen=True, eq=False)
class Effect:
    """Positive semidefinite POVM element with an outcome label."""
    matrix: ComplexMatrix2 = field(repr=False)
    label: str = ""

    def __post_init__(self):
        m = np.array(require_hermitian(self.matrix, name=f"effect {self.label!r}"), copy=True)
        m = 0.5 * (m + m.conj().T)
        values, _ = hermitian_eig2(m)
        if values[-1] < -EFFECT_TOL:
            raise InvalidParameterError(
                f"Effect {self.label!r} is not positive semidefinite (eigenvalue {values[-1]:.3e})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def probability(self, state: QubitState) -> float:
        return state.expectation(self.matrix)


class Povm:
    """
    Ordered list of effects summing to the identity.

    Construction fails when completeness is violated by more than
    ``COMPLETENESS_TOL`` or when labels repeat.
    """

    def __init__(self, effects: Sequence[Effect]):
        if not effects:
            raise InvalidParameterError("A POVM needs at least one effect")
        labels = [e.label for e in effects]
        if len(set(labels)) != len(labels):
            raise InvalidParameterError(f"Duplicate effect labels: {labels}")

        total = sum(e.matrix for e in effects)
        deviation = float(np.max(np.abs(total - pauli(0))))
        if deviation > COMPLETENESS_TOL:
            raise InvalidParameterError(f"Effects do not sum to identity (deviation {deviation:.3e})")

        self.effects: List[Effect] = list(effects)

    def __len__(self) -> int:
        return len(self.effects)

    def __iter__(self):
        return iter(self.effects)

    @property
    def labels(self) -> List[str]:
        return [e.label for e in self.effects]

    def matrices(self) -> List[np.ndarray]:
        return [e.matrix for e in self.effects]

    def probabilities(self, state: QubitState) -> np.ndarray:
        """Born-rule distribution Tr[rho E_k] in effect order."""
        return np.array([e.probability(state) for e in self.effects])

    def distribution(self, state: QubitState) -> Dict[str, float]:
        return dict(zip(self.labels, self.probabilities(state)))

    def fisher(self, point: ParamPoint) -> FisherMatrix:
        """Exact classical Fisher matrix on the dephased state at ``point``."""
        return povm_fisher(self.matrices(), point)

    def merge(self, groups: Dict[str, Sequence[str]]) -> "Povm":
        """
        Coarse-grain effects.

        Args:
            groups: New label -> labels of the effects it sums. Effects not
                named in any group are kept as they are.
        """
        by_label = {e.label: e for e in self.effects}
        used = set()
        merged: List[Effect] = []
        for new_label, members in groups.items():
            missing = [m for m in members if m not in by_label]
            if missing:
                raise InvalidParameterError(f"Unknown effect labels in merge: {missing}")
            overlap = used.intersection(members)
            if overlap:
                raise InvalidParameterError(f"Effects merged twice: {sorted(overlap)}")
            used.update(members)
            merged.append(Effect(sum(by_label[m].matrix for m in members), new_label))

        kept = [e for e in self.effects if e.label not in used]
        return Povm(kept + merged)


def projector_along(direction: Sequence[float], weight: float = 1.0, label: str = "") -> Effect:
    """``weight * (I + n.sigma) / 2`` for a unit Bloch direction ``n``."""
    n = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(n))
    if abs(norm - 1.0) > 1e-12:
        raise InvalidParameterError(f"Direction must be a unit vector, norm = {norm}")
    matrix = 0.5 * weight * (pauli(0) + n[0] * pauli("x") + n[1] * pauli("y") + n[2] * pauli("z"))
    return Effect(matrix, label)


def trivial_povm() -> Povm:
    """Single identity effect: no information about any parameter."""
    return Povm([Effect(pauli(0), "1")])


def random_povm(rng: np.random.Generator, n_effects: Optional[int] = None) -> Povm:
    """
    Random qubit POVM with 2 to 4 effects.

    Positive matrices A_k = G_k G_k^dagger (complex Gaussian G_k) are
    normalised to completeness as S^-1/2 A_k S^-1/2 with S = sum_k A_k.
    """
    if n_effects is None:
        n_effects = int(rng.integers(2, 5))
    if n_effects < 2 or n_effects > 4:
        raise InvalidParameterError(f"n_effects must be in [2, 4], got {n_effects}")

    raw = []
    for _ in range(n_effects):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        raw.append(g @ g.conj().T)

    s = sum(raw)
    s_inv_sqrt = hermitian_function(s, lambda v: 1.0 / np.sqrt(v))
    effects = []
    for k, a in enumerate(raw):
        e = s_inv_sqrt @ a @ s_inv_sqrt
        effects.append(Effect(0.5 * (e + e.conj().T), f"e{k}"))

    logger.debug(f"Sampled random POVM with {n_effects} effects")
    return Povm(effects)
