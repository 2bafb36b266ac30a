"""
Command-line interface.
Emits figure datasets (CSV/JSON) and runs simulations end to end.
"""

from .schemas import COMMANDS, RunConfig
from .commands import (
    cmd_qfi,
    cmd_tradeoff,
    cmd_region,
    cmd_fisher,
    cmd_simulate,
    cmd_estimate,
    cmd_calibrate,
    cmd_experiment,
    run_command,
)
from .main import main, build_parser, build_run_config

__all__ = [
    "COMMANDS",
    "RunConfig",
    "cmd_qfi",
    "cmd_tradeoff",
    "cmd_region",
    "cmd_fisher",
    "cmd_simulate",
    "cmd_estimate",
    "cmd_calibrate",
    "cmd_experiment",
    "run_command",
    "main",
    "build_parser",
    "build_run_config",
]
