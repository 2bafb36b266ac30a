"""
Polarisation Sagnac device simulator.
Three-outcome intensity detection of pure and dephased inputs, with
multiplicative detector noise and mixed-state synthesis from pure inputs.
"""
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Sequence, Tuple, Union
import numpy as np
from pydantic import BaseModel, Field
from loguru import logger

from src.exceptions import InvalidParameterError
from src.qubit import QubitState, coherence, dephased_state
from .jones import (
    MINUS_45,
    OMEGA_MAX_DEG,
    PLUS_45,
    alpha_for_phase,
    hwp1_amplitudes,
    hwp_to_theta,
    jones_outputs,
    normalized_amplitudes,
    polarisation_density,
)

SIGNAL_GUARD = 1e-12

# Outcome labels of the device channels in the weak-scheme (w, s) notation
MERGED_LABELS = ("++", "-+", "*-")
SPLIT_LABELS = ("++", "-+", "--", "+-")


class DeviceConfig(BaseModel):
    """Sagnac simulator settings."""
    omega_deg: float = Field(8.0, ge=0.0, le=OMEGA_MAX_DEG, description="HWP2 angle in degrees")
    input_angle_deg: float = Field(0.0, description="HWP1 angle alpha in degrees")
    noise_rel_std: float = Field(0.0, ge=0.0, description="Relative std of detector noise")
    merge_output2: bool = Field(True, description="Detect only the total power of output 2")
    intensity_scale: float = Field(1.0, gt=0.0, description="Input power of a dataset")

    @property
    def theta(self) -> float:
        return hwp_to_theta(self.omega_deg)

    def noiseless(self) -> "DeviceConfig":
        return self.model_copy(update={"noise_rel_std": 0.0})


def as_device_config(config: Union[DeviceConfig, Dict, None]) -> DeviceConfig:
    if isinstance(config, DeviceConfig):
        return config
    return DeviceConfig(**(config or {}))


@dataclass
class IntensityRecord:
    """
    Detected intensities of one input.

    ``i_m`` is the total power of output 2; ``i_mp``/``i_mm`` hold its
    +45/-45 split when output 2 is resolved.
    """
    i_pp: float
    i_pm: float
    i_m: float
    i_mp: Optional[float] = None
    i_mm: Optional[float] = None

    def __post_init__(self):
        values = [self.i_pp, self.i_pm, self.i_m]
        if self.is_split:
            values += [self.i_mp, self.i_mm]
        if any((not np.isfinite(v)) or v < 0 for v in values):
            raise InvalidParameterError(f"Intensities must be finite and >= 0, got {values}")

    @property
    def is_split(self) -> bool:
        return self.i_mp is not None and self.i_mm is not None

    @property
    def total(self) -> float:
        return self.i_pp + self.i_pm + self.i_m

    def channels(self, merged: bool = True) -> np.ndarray:
        """Intensities in ``MERGED_LABELS`` (or ``SPLIT_LABELS``) order."""
        if merged:
            return np.array([self.i_pp, self.i_pm, self.i_m])
        if not self.is_split:
            raise InvalidParameterError("Record has no resolved output-2 channels")
        return np.array([self.i_pp, self.i_pm, self.i_mp, self.i_mm])

    def signals(self) -> Tuple[float, float]:
        """
        Calibration signals (s_z, s_x).

        s_z = (i_pp + i_pm - i_m) / total and s_x = (i_pp - i_pm) / (i_pp + i_pm);
        s_x is NaN when output 1 is dark.
        """
        total = self.total
        if total < SIGNAL_GUARD:
            raise InvalidParameterError("Record carries no power")
        out1 = self.i_pp + self.i_pm
        s_z = (out1 - self.i_m) / total
        s_x = (self.i_pp - self.i_pm) / out1 if out1 >= SIGNAL_GUARD else float("nan")
        return float(s_z), float(s_x)

    def combine(self, other: "IntensityRecord", weight: float, other_weight: float) -> "IntensityRecord":
        """Weighted sum of two records."""
        def mix(a, b):
            if a is None or b is None:
                return None
            return weight * a + other_weight * b

        return IntensityRecord(
            i_pp=weight * self.i_pp + other_weight * other.i_pp,
            i_pm=weight * self.i_pm + other_weight * other.i_pm,
            i_m=weight * self.i_m + other_weight * other.i_m,
            i_mp=mix(self.i_mp, other.i_mp),
            i_mm=mix(self.i_mm, other.i_mm),
        )

    def to_dict(self) -> Dict:
        return asdict(self)


def _detect(j1: np.ndarray, j2: np.ndarray, rho_hv: np.ndarray) -> np.ndarray:
    """Noiseless (i_pp, i_pm, i_mp, i_mm) for an H/V density matrix."""
    out1 = j1 @ rho_hv @ j1.conj().T
    out2 = j2 @ rho_hv @ j2.conj().T
    return np.array([
        np.real(PLUS_45.conj() @ out1 @ PLUS_45),
        np.real(MINUS_45.conj() @ out1 @ MINUS_45),
        np.real(PLUS_45.conj() @ out2 @ PLUS_45),
        np.real(MINUS_45.conj() @ out2 @ MINUS_45),
    ])


class SagnacDevice:
    """
    Simulated device: HWP1 input preparation, HWP2 strength setting and
    three (or four) power meters.
    """

    def __init__(self, config: Union[DeviceConfig, Dict, None] = None):
        """
        Initialize device.

        Args:
            config: DeviceConfig or dict of its fields
        """
        self.config = as_device_config(config)
        self.j1, self.j2 = jones_outputs(self.config.omega_deg)
        logger.info(
            f"SagnacDevice initialized (omega={self.config.omega_deg} deg, "
            f"theta={np.degrees(self.config.theta):.2f} deg)"
        )

    @property
    def theta(self) -> float:
        return self.config.theta

    def _to_record(
        self,
        channels: np.ndarray,
        rng: Optional[np.random.Generator],
        scale: float = 1.0,
        noisy: bool = True
    ) -> IntensityRecord:
        channels = np.clip(channels, 0.0, None) * self.config.intensity_scale * scale
        if self.config.merge_output2:
            # one power meter on output 2
            channels = np.array([channels[0], channels[1], channels[2] + channels[3]])
        sigma = self.config.noise_rel_std if noisy else 0.0
        if sigma > 0:
            if rng is None:
                raise InvalidParameterError("noise_rel_std > 0 requires a random generator")
            channels = channels * (1.0 + sigma * rng.standard_normal(channels.size))
            if np.any(channels < 0):
                logger.warning(f"Clamped {int(np.sum(channels < 0))} negative noisy intensity(ies) to 0")
                channels = np.clip(channels, 0.0, None)

        if self.config.merge_output2:
            i_pp, i_pm, i_m = (float(c) for c in channels)
            return IntensityRecord(i_pp=i_pp, i_pm=i_pm, i_m=i_m)
        i_pp, i_pm, i_mp, i_mm = (float(c) for c in channels)
        return IntensityRecord(i_pp=i_pp, i_pm=i_pm, i_m=i_mp + i_mm, i_mp=i_mp, i_mm=i_mm)

    def intensities(
        self,
        amplitudes=None,
        rng: Optional[np.random.Generator] = None,
        scale: float = 1.0
    ) -> IntensityRecord:
        """
        Detect a pure linear-polarisation input.

        Args:
            amplitudes: (c_H, c_V); defaults to HWP1 at ``config.input_angle_deg``
            rng: Generator for detector noise
            scale: Extra power factor of this dataset
        """
        if amplitudes is None:
            amplitudes = hwp1_amplitudes(self.config.input_angle_deg)
        psi = normalized_amplitudes(amplitudes)
        return self._to_record(_detect(self.j1, self.j2, np.outer(psi, psi.conj())), rng, scale)

    def at_alpha(self, alpha_deg: float, rng: Optional[np.random.Generator] = None, scale: float = 1.0):
        return self.intensities(hwp1_amplitudes(alpha_deg), rng=rng, scale=scale)

    def pure_record(self, phi: float, rng: Optional[np.random.Generator] = None, scale: float = 1.0):
        return self.at_alpha(alpha_for_phase(phi), rng=rng, scale=scale)

    def state_intensities(self, state: QubitState) -> IntensityRecord:
        """Noiseless response to an arbitrary circular-basis qubit state."""
        rho_hv = polarisation_density(state)
        return self._to_record(_detect(self.j1, self.j2, rho_hv), rng=None, noisy=False)

    def synthesize(
        self,
        phi0: float,
        delta0: float,
        rng: Optional[np.random.Generator] = None,
        scales: Optional[Sequence[float]] = None
    ) -> IntensityRecord:
        """
        Dephased input synthesized from two pure inputs.

        Records of phi0 and phi0 - pi are added with weights
        (1 +/- exp(-delta0^2)) / 2; each dataset gets its own noise draw and
        optional power factor.
        """
        if delta0 < 0:
            raise InvalidParameterError(f"delta0 must be >= 0, got {delta0}")
        scale_plus, scale_minus = (1.0, 1.0) if scales is None else tuple(scales)
        q = coherence(delta0)
        w_plus, w_minus = 0.5 * (1.0 + q), 0.5 * (1.0 - q)
        first = self.pure_record(phi0, rng=rng, scale=scale_plus)
        second = self.pure_record(phi0 - np.pi, rng=rng, scale=scale_minus)
        return first.combine(second, w_plus, w_minus)


def device_intensities(
    config: Union[DeviceConfig, Dict, None],
    amplitudes=None,
    rng: Optional[np.random.Generator] = None
) -> IntensityRecord:
    """Intensities of a pure input (c_H, c_V) on a device built from ``config``."""
    return SagnacDevice(config).intensities(amplitudes, rng=rng)


def mixed_state_intensities(config: Union[DeviceConfig, Dict, None], phi: float, delta: float) -> IntensityRecord:
    """Noiseless response to the dephased state itself."""
    return SagnacDevice(as_device_config(config).noiseless()).state_intensities(dephased_state(phi, delta))


def synthesize_mixed(
    phi0: float,
    delta0: float,
    config: Union[DeviceConfig, Dict, None] = None,
    rng: Optional[np.random.Generator] = None,
    scales: Optional[Sequence[float]] = None
) -> IntensityRecord:
    """Mixed-state record synthesized from pure inputs (see ``SagnacDevice.synthesize``)."""
    return SagnacDevice(config).synthesize(phi0, delta0, rng=rng, scales=scales)


def device_probabilities(omega_deg: float, merged: bool = True):
    """
    Outcome model of the noiseless device at HWP2 angle ``omega_deg``.

    Returns:
        Callable ``(phi, delta) -> probabilities`` in ``MERGED_LABELS``
        (or ``SPLIT_LABELS``) order, usable by ``fisher_from_model``
    """
    j1, j2 = jones_outputs(omega_deg)

    def model(phi: float, delta: float) -> np.ndarray:
        rho_hv = polarisation_density(dephased_state(phi, abs(delta)))
        i_pp, i_pm, i_mp, i_mm = _detect(j1, j2, rho_hv)
        if merged:
            return np.array([i_pp, i_pm, i_mp + i_mm])
        return np.array([i_pp, i_pm, i_mp, i_mm])

    return model
