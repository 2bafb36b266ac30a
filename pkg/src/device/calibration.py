"""
Calibration curves of the Sagnac device.

A calibration table stores the noiseless pure-state intensities against the
HWP1 angle. Intensities are linear in the input density matrix, so model
signals of dephased states are assembled from two interpolated rows.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union
import numpy as np
import pandas as pd
from loguru import logger

from src.config import load_simulation_config
from src.exceptions import InvalidParameterError
from .sagnac import SIGNAL_GUARD, DeviceConfig, IntensityRecord, SagnacDevice, as_device_config

ALPHA_PERIOD_DEG = 90.0
SIGNAL_BOUND = 1.0 + 1e-9
CALIBRATION_COLUMNS = ["alpha_deg", "i_pp", "i_pm", "i_m", "s_z", "s_x"]


def signals_from_intensities(i_pp, i_pm, i_m):
    """Vectorized (s_z, s_x); s_x is NaN where output 1 is dark."""
    i_pp, i_pm, i_m = (np.asarray(v, dtype=float) for v in (i_pp, i_pm, i_m))
    out1 = i_pp + i_pm
    total = out1 + i_m
    s_z = (out1 - i_m) / np.where(total > SIGNAL_GUARD, total, np.nan)
    s_x = (i_pp - i_pm) / np.where(out1 >= SIGNAL_GUARD, out1, np.nan)
    return s_z, s_x


def signals_from_record(record: IntensityRecord) -> Tuple[float, float]:
    return record.signals()


@dataclass
class CalibrationTable:
    """Pure-state intensities and signals on a grid of HWP1 angles."""
    alpha_deg: np.ndarray
    i_pp: np.ndarray
    i_pm: np.ndarray
    i_m: np.ndarray
    omega_deg: float = 0.0
    s_z: np.ndarray = field(init=False)
    s_x: np.ndarray = field(init=False)
    flagged: np.ndarray = field(init=False)

    def __post_init__(self):
        self.alpha_deg = np.atleast_1d(np.asarray(self.alpha_deg, dtype=float))
        self.i_pp = np.atleast_1d(np.asarray(self.i_pp, dtype=float))
        self.i_pm = np.atleast_1d(np.asarray(self.i_pm, dtype=float))
        self.i_m = np.atleast_1d(np.asarray(self.i_m, dtype=float))
        if self.alpha_deg.size == 0:
            raise InvalidParameterError("Calibration table is empty")
        if not (self.alpha_deg.size == self.i_pp.size == self.i_pm.size == self.i_m.size):
            raise InvalidParameterError("Calibration columns have different lengths")

        self.s_z, self.s_x = signals_from_intensities(self.i_pp, self.i_pm, self.i_m)
        self.flagged = ~np.isfinite(self.s_x)
        for name, values in (("s_z", self.s_z), ("s_x", self.s_x)):
            finite = values[np.isfinite(values)]
            if finite.size and np.max(np.abs(finite)) > SIGNAL_BOUND:
                raise InvalidParameterError(f"Calibration signal {name} leaves [-1, 1]")

        # Periodic interpolation nodes: alpha reduced mod 90 without duplicates
        reduced = np.mod(self.alpha_deg, ALPHA_PERIOD_DEG)
        self._nodes, first = np.unique(reduced, return_index=True)
        self._values = np.vstack([self.i_pp[first], self.i_pm[first], self.i_m[first]])

    def __len__(self) -> int:
        return int(self.alpha_deg.size)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "alpha_deg": self.alpha_deg,
            "i_pp": self.i_pp,
            "i_pm": self.i_pm,
            "i_m": self.i_m,
            "s_z": self.s_z,
            "s_x": self.s_x,
        }, columns=CALIBRATION_COLUMNS)

    def intensities_at(self, alpha_deg) -> np.ndarray:
        """
        Interpolated (i_pp, i_pm, i_m) at arbitrary HWP1 angles.

        Linear between rows and 90-degree periodic. A single-row table is
        constant.

        Returns:
            Array of shape (3,) + shape(alpha_deg)
        """
        alpha = np.asarray(alpha_deg, dtype=float)
        if self._nodes.size == 1:
            return np.stack([np.full(alpha.shape, v[0]) for v in self._values])
        return np.stack([
            np.interp(alpha, self._nodes, v, period=ALPHA_PERIOD_DEG) for v in self._values
        ])

    def model_intensities(self, phi, delta) -> np.ndarray:
        """
        Intensities of the dephased state built from calibration rows.

        The pure inputs phi and phi - pi sit at HWP1 angles alpha and
        alpha + 45 degrees, weighted (1 +/- exp(-delta^2)) / 2.
        """
        phi = np.asarray(phi, dtype=float)
        delta = np.asarray(delta, dtype=float)
        alpha = -np.degrees(phi) / 4.0
        q = np.exp(-delta * delta)
        w_plus, w_minus = 0.5 * (1.0 + q), 0.5 * (1.0 - q)
        return w_plus * self.intensities_at(alpha) + w_minus * self.intensities_at(alpha + 45.0)

    def model_signals(self, phi, delta):
        """Model (s_z, s_x) of the dephased state, broadcasting over phi and delta."""
        i_pp, i_pm, i_m = self.model_intensities(phi, delta)
        return signals_from_intensities(i_pp, i_pm, i_m)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, omega_deg: float = 0.0) -> "CalibrationTable":
        missing = {"alpha_deg", "i_pp", "i_pm", "i_m"} - set(frame.columns)
        if missing:
            raise InvalidParameterError(f"Calibration frame lacks columns: {sorted(missing)}")
        return cls(
            alpha_deg=frame["alpha_deg"].to_numpy(),
            i_pp=frame["i_pp"].to_numpy(),
            i_pm=frame["i_pm"].to_numpy(),
            i_m=frame["i_m"].to_numpy(),
            omega_deg=omega_deg,
        )


def default_alpha_grid(config: Optional[Dict] = None) -> np.ndarray:
    """HWP1 grid from the ``calibration`` section of the simulation config."""
    if config is None:
        config = load_simulation_config().get("calibration", {})
    start = config.get("alpha_start_deg", -45.0)
    stop = config.get("alpha_stop_deg", 45.0)
    step = config.get("alpha_step_deg", 0.5)
    if step <= 0 or stop < start:
        raise InvalidParameterError(f"Invalid calibration grid ({start}, {stop}, {step})")
    n = int(round((stop - start) / step)) + 1
    return start + step * np.arange(n)


def calibration_scan(
    config: Union[DeviceConfig, Dict, None],
    alpha_grid: Optional[Sequence[float]] = None
) -> CalibrationTable:
    """
    Noiseless pure-state scan over HWP1 angles.

    Rows where output 1 is dark (i_pp + i_pm < 1e-12) keep their intensities
    but carry s_x = NaN and are flagged.
    """
    device_config = as_device_config(config).noiseless()
    grid = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    if grid.size == 0:
        raise InvalidParameterError("alpha grid is empty")

    device = SagnacDevice(device_config.model_copy(update={"merge_output2": True, "intensity_scale": 1.0}))
    records = [device.at_alpha(a) for a in grid]
    table = CalibrationTable(
        alpha_deg=grid,
        i_pp=[r.i_pp for r in records],
        i_pm=[r.i_pm for r in records],
        i_m=[r.i_m for r in records],
        omega_deg=device_config.omega_deg,
    )
    if np.any(table.flagged):
        logger.debug(f"Calibration: {int(np.sum(table.flagged))} row(s) with dark output 1")
    logger.info(f"Calibration scan complete: {len(table)} rows at omega={device_config.omega_deg} deg")
    return table
