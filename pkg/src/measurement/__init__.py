"""
Weak measurement module.
Qubit POVMs, the four-outcome weak scheme and its trade-off scans.
"""

from .povm import (
    MeasurementStrength,
    Effect,
    Povm,
    projector_along,
    trivial_povm,
    random_povm,
)
from .weak_scheme import (
    OUTCOME_LABELS,
    weak_operators,
    weak_scheme_povm,
    outcome_probabilities,
    weak_model,
    fisher_components,
    analytic_fisher,
    projective_mixture_povm,
    merged_povm,
)
from .tradeoff import (
    TRADEOFF_COLUMNS,
    TradeoffRegion,
    tradeoff_scan,
    tradeoff_boundary,
    tradeoff_region,
    favoured_widths,
)

__all__ = [
    "MeasurementStrength",
    "Effect",
    "Povm",
    "projector_along",
    "trivial_povm",
    "random_povm",
    "OUTCOME_LABELS",
    "weak_operators",
    "weak_scheme_povm",
    "outcome_probabilities",
    "weak_model",
    "fisher_components",
    "analytic_fisher",
    "projective_mixture_povm",
    "merged_povm",
    "TRADEOFF_COLUMNS",
    "TradeoffRegion",
    "tradeoff_scan",
    "tradeoff_boundary",
    "tradeoff_region",
    "favoured_widths",
]
