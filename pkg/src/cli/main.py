"""
Command-line entry point.
Merges YAML defaults, an optional JSON config file and explicit flags into a
RunConfig, runs the command and writes CSV or JSON.
"""
import argparse
import json
import sys
from typing import Dict, List, Optional
from loguru import logger
from pydantic import ValidationError

from src.config import settings, load_simulation_config
from src.exceptions import EstimationError, InvalidParameterError, NonIdentifiableError
from .commands import run_command
from .output import sibling_path, write_output
from .schemas import COMMANDS, RunConfig

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

# argparse destination -> RunConfig field
FLAG_FIELDS = {
    "phi": "phi",
    "delta": "delta",
    "theta": "theta",
    "omega_deg": "omega_deg",
    "shots": "shots",
    "reps": "repetitions",
    "seed": "seed",
    "noise": "noise_rel_std",
    "format": "format",
    "out": "out",
    "delta_grid": "delta_grid",
    "theta_steps": "theta_steps",
    "delta_steps": "delta_steps",
    "delta_max": "delta_max",
    "m_prime": "m_prime",
    "method": "method",
    "adaptive_split": "adaptive_split",
    "phi0_deg": "phi0_deg",
    "delta0_values": "delta0_values",
}


def configure_logging() -> None:
    logger.remove()
    logger.add(sys.stderr, level=settings.log_level)
    if settings.log_file:
        logger.add(settings.log_file, rotation="500 MB", level="INFO")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weak-metro",
        description="Joint phase / phase-diffusion estimation with weak measurements",
    )
    parser.add_argument("command", choices=COMMANDS, help="Command to run")
    parser.add_argument("--config", help="JSON file with RunConfig fields")

    parser.add_argument("--phi", type=float, help="Phase in radians")
    parser.add_argument("--delta", type=float, help="Phase-diffusion amplitude")
    parser.add_argument("--theta", type=float, help="Measurement strength in radians")
    parser.add_argument("--omega-deg", dest="omega_deg", type=float, help="HWP2 angle in degrees")
    parser.add_argument("--shots", type=int, help="Measurement repetitions M")
    parser.add_argument("--reps", type=int, help="Monte Carlo repetitions")
    parser.add_argument("--seed", type=int, help="Root random seed")
    parser.add_argument("--noise", type=float, help="Relative detector noise")
    parser.add_argument("--format", choices=["csv", "json"], help="Output format")
    parser.add_argument("--out", help="Output file (stdout when omitted)")

    parser.add_argument("--delta-grid", dest="delta_grid", type=_float_list, help="Comma-separated deltas")
    parser.add_argument("--theta-steps", dest="theta_steps", type=int, help="Strength grid size")
    parser.add_argument("--delta-steps", dest="delta_steps", type=int, help="Diffusion grid size")
    parser.add_argument("--delta-max", dest="delta_max", type=float, help="Largest delta of the region grid")
    parser.add_argument("--m-prime", dest="m_prime", type=float, help="Scale of the comparison bound")
    parser.add_argument("--method", choices=["residual", "mle"], help="Monte Carlo estimator")
    parser.add_argument("--adaptive-split", dest="adaptive_split", type=float, help="Stage-1 budget fraction")
    parser.add_argument("--phi0-deg", dest="phi0_deg", type=float, help="First pure input phase in degrees")
    parser.add_argument("--delta0-values", dest="delta0_values", type=_float_list, help="Comma-separated delta0 sweep")
    return parser


def yaml_defaults() -> Dict:
    """RunConfig fields taken from ``config/simulation_config.yaml``."""
    sim = load_simulation_config()
    device = sim.get("device", {})
    monte_carlo = sim.get("monte_carlo", {})
    experiment = sim.get("experiment", {})
    estimator = sim.get("estimator", {})

    defaults = {
        "omega_deg": device.get("omega_deg"),
        "noise_rel_std": device.get("noise_rel_std"),
        "repetitions": monte_carlo.get("repetitions"),
        "m_prime": monte_carlo.get("m_prime"),
        "method": monte_carlo.get("method"),
        "phi0_deg": experiment.get("phi0_deg"),
        "delta0_values": experiment.get("delta0_values"),
        "retry_budget": estimator.get("retry_budget"),
    }
    return {k: v for k, v in defaults.items() if v is not None}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """YAML defaults < JSON config file < explicit flags."""
    merged = yaml_defaults()

    if args.config:
        with open(args.config, "r") as f:
            file_config = json.load(f)
        if not isinstance(file_config, dict):
            raise InvalidParameterError("JSON config must be an object")
        merged.update(file_config)

    for dest, field_name in FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            merged[field_name] = value

    merged["command"] = args.command
    return RunConfig(**merged)


def emit(run: RunConfig, payload) -> None:
    if run.command != "experiment":
        write_output(payload, run.format, run.out)
        return

    if run.format == "csv":
        write_output(payload["sweep"], "csv", run.out)
    else:
        write_output(
            {"sweep": payload["sweep"].to_dict(orient="records"), "monte_carlo": payload["monte_carlo"]},
            "json",
            run.out,
        )
    samples_path = sibling_path(run.out, "samples")
    if samples_path is not None:
        write_output(payload["samples"], run.format, samples_path)
    else:
        logger.info("Per-run samples not written (no --out given)")


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        run = build_run_config(args)
        payload = run_command(run)
        emit(run, payload)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID
    except (InvalidParameterError, NonIdentifiableError, FileNotFoundError, json.JSONDecodeError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID
    except EstimationError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
