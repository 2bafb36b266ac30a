"""
Pydantic schema for command-line runs.
"""
from typing import List, Literal, Optional
import numpy as np
from pydantic import BaseModel, Field, field_validator

from src.config import settings

COMMANDS = ("qfi", "tradeoff", "region", "fisher", "simulate", "estimate", "calibrate", "experiment")


class RunConfig(BaseModel):
    """Validated settings of one CLI invocation."""
    command: Literal[COMMANDS] = Field(..., description="Subcommand to run")

    # Parameter point
    phi: float = Field(0.0, description="Phase in radians")
    delta: float = Field(1.0, ge=0.0, description="Phase-diffusion amplitude")
    theta: float = Field(np.pi / 4, ge=0.0, le=np.pi / 2 + 1e-12, description="Measurement strength")
    omega_deg: float = Field(8.0, ge=0.0, le=22.5, description="HWP2 angle in degrees")

    # Grids
    delta_grid: List[float] = Field(
        default_factory=lambda: [0.0, 0.05, 0.1, 0.5, 1.0, 2.0],
        description="Diffusion values for the qfi table",
    )
    theta_steps: int = Field(91, ge=2, description="Strength grid size")
    delta_steps: int = Field(100, ge=2, description="Diffusion grid size for region")
    delta_max: float = Field(3.0, gt=0.0, description="Upper diffusion value for region")

    # Sampling and Monte Carlo
    shots: int = Field(100000, ge=1, description="Repetitions M of the measurement")
    repetitions: int = Field(10000, ge=2, description="Monte Carlo repetitions")
    seed: int = Field(settings.default_seed, description="Root random seed")
    noise_rel_std: float = Field(0.01, ge=0.0, description="Relative detector noise")
    m_prime: float = Field(400000.0, gt=0.0, description="Scale M' of the comparison bound")
    method: Literal["residual", "mle"] = Field("residual", description="Monte Carlo estimator")
    adaptive_split: Optional[float] = Field(None, gt=0.0, lt=1.0, description="Stage-1 budget fraction")

    # Experiment sweep
    phi0_deg: float = Field(182.0, description="Phase of the first pure input in degrees")
    delta0_values: List[float] = Field(
        default_factory=lambda: [0.03, 0.05, 0.094, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5],
        description="Diffusion values of the synthesized states",
    )
    retry_budget: int = Field(2, ge=0, description="Reseeded retries after a failed estimate")

    # Output
    out: Optional[str] = Field(None, description="Output path (stdout when omitted)")
    format: Literal["csv", "json"] = Field("csv", description="Output format")

    @field_validator("delta_grid", "delta0_values")
    @classmethod
    def non_empty_non_negative(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("grid must not be empty")
        if any((not np.isfinite(v)) or v < 0 for v in values):
            raise ValueError("grid values must be finite and >= 0")
        return values
