"""
Estimation theory module.
Classical and quantum Fisher information, effective Fisher information,
Cramer-Rao bounds and the trade-off ratios.
"""

from .schema import PARAMETERS, ParamPoint, FisherMatrix, QfiMatrix, CovarianceBound
from .classical import (
    OutcomeModel,
    TradeoffRatios,
    fisher_from_model,
    fisher_from_partials,
    povm_fisher,
    effective_fisher,
    tradeoff_ratios,
    crb_covariance,
)
from .quantum import (
    sld,
    qfi_matrix,
    qfi_closed_form,
    exact_qfi_matrix,
    qubit_qfi_from_bloch,
    plus_one_h_dd,
    h_dd_discrepancy,
)

__all__ = [
    "PARAMETERS",
    "ParamPoint",
    "FisherMatrix",
    "QfiMatrix",
    "CovarianceBound",
    "OutcomeModel",
    "TradeoffRatios",
    "fisher_from_model",
    "fisher_from_partials",
    "povm_fisher",
    "effective_fisher",
    "tradeoff_ratios",
    "crb_covariance",
    "sld",
    "qfi_matrix",
    "qfi_closed_form",
    "exact_qfi_matrix",
    "qubit_qfi_from_bloch",
    "plus_one_h_dd",
    "h_dd_discrepancy",
]
