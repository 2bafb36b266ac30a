"""
Pytest configuration and fixtures.
"""
import numpy as np
import pytest

from src.device import DeviceConfig, calibration_scan


def pytest_configure(config):
    """Configure pytest."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers", "integration: marks tests as integration tests"
    )


@pytest.fixture(scope="session")
def estimator_config():
    """Estimator settings tight enough for round-trip checks."""
    return {
        "grid_phi": 120,
        "grid_delta": 60,
        "delta_min": 0.0,
        "delta_max": 2.0,
        "n_starts": 3,
        "xatol": 1e-10,
        "fatol": 1e-14,
        "max_iter": 4000,
        "trap_threshold": 1e-3,
        "trap_runner_up": 0.05,
    }


@pytest.fixture(scope="session")
def device_config():
    """Noisy three-outcome device at the 58 degree working point."""
    return DeviceConfig(omega_deg=8.0, noise_rel_std=0.01, merge_output2=True)


@pytest.fixture(scope="session")
def calibration(device_config):
    """Half-degree calibration table of the working-point device."""
    return calibration_scan(device_config, alpha_grid=np.arange(-45.0, 45.0 + 1e-9, 0.5))


@pytest.fixture(scope="session")
def parameter_grid():
    """Small (phi, delta, theta) grid for identity checks."""
    phis = np.linspace(-np.pi, np.pi, 9)
    deltas = np.linspace(0.05, 2.0, 7)
    thetas = np.linspace(0.05, np.pi / 2 - 0.05, 6)
    return phis, deltas, thetas
