"""
Sagnac device module.
Jones calculus, three-outcome intensity detection, calibration curves and
mixed-state synthesis.
"""

from .jones import (
    hwp_to_theta,
    theta_to_hwp,
    jones_outputs,
    half_wave_plate,
    hwp1_amplitudes,
    polarisation_density,
    alpha_for_phase,
    phase_for_alpha,
)
from .sagnac import (
    MERGED_LABELS,
    SPLIT_LABELS,
    DeviceConfig,
    IntensityRecord,
    SagnacDevice,
    device_intensities,
    mixed_state_intensities,
    synthesize_mixed,
    device_probabilities,
)
from .calibration import (
    CALIBRATION_COLUMNS,
    CalibrationTable,
    calibration_scan,
    default_alpha_grid,
    signals_from_record,
)

__all__ = [
    "hwp_to_theta",
    "theta_to_hwp",
    "jones_outputs",
    "half_wave_plate",
    "hwp1_amplitudes",
    "polarisation_density",
    "alpha_for_phase",
    "phase_for_alpha",
    "MERGED_LABELS",
    "SPLIT_LABELS",
    "DeviceConfig",
    "IntensityRecord",
    "SagnacDevice",
    "device_intensities",
    "mixed_state_intensities",
    "synthesize_mixed",
    "device_probabilities",
    "CALIBRATION_COLUMNS",
    "CalibrationTable",
    "calibration_scan",
    "default_alpha_grid",
    "signals_from_record",
]
