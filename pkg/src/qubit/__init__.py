"""
Qubit core module.
Exact 2x2 linear algebra, qubit states and the dephasing channel.
"""

from .linalg import (
    ComplexMatrix2,
    pauli,
    identity,
    dagger,
    hermitian_eig2,
    hermitian_function,
)
from .states import (
    BlochVector,
    QubitState,
    coherence,
    dephased_state,
    dephased_state_derivatives,
    maximally_mixed,
    bloch_from_state,
    state_from_bloch,
)

__all__ = [
    "ComplexMatrix2",
    "pauli",
    "identity",
    "dagger",
    "hermitian_eig2",
    "hermitian_function",
    "BlochVector",
    "QubitState",
    "coherence",
    "dephased_state",
    "dephased_state_derivatives",
    "maximally_mixed",
    "bloch_from_state",
    "state_from_bloch",
]
