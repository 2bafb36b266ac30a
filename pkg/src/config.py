"""
Configuration management using Pydantic Settings.
"""
from typing import Optional
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
import yaml
from pathlib import Path


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="WEAKMETRO_",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    log_level: str = Field("INFO")
    log_file: Optional[str] = Field(None)
    max_workers: int = Field(4, ge=1)
    config_dir: str = Field("config")

    # Numerics
    default_seed: int = Field(20150601)
    fd_step: float = Field(1e-5, gt=0)


def load_yaml_config(config_path: str) -> dict:
    """Load YAML configuration file."""
    path = Path(config_path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")

    with open(path, "r") as f:
        return yaml.safe_load(f)


def load_simulation_config(config_dir: Optional[str] = None) -> dict:
    """
    Load the simulation defaults shipped in ``config/simulation_config.yaml``.

    Falls back to the copy next to the package when the working directory
    has no ``config`` folder, so the CLI works from any location.
    """
    candidates = [
        Path(config_dir or settings.config_dir) / "simulation_config.yaml",
        Path(__file__).resolve().parent.parent / "config" / "simulation_config.yaml",
    ]
    for candidate in candidates:
        if candidate.exists():
            return load_yaml_config(str(candidate))
    raise FileNotFoundError(
        f"Config file not found: {', '.join(str(c) for c in candidates)}"
    )


# Global settings instance
settings = Settings()
