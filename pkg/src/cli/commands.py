"""
CLI command implementations.
Each command takes a validated RunConfig and returns a DataFrame or a
report dict; the caller serializes it.
"""
from typing import Dict, List
import numpy as np
import pandas as pd
from loguru import logger

from src.config import load_simulation_config
from src.exceptions import EstimationError, InvalidParameterError
from src.estimation import (
    ParamPoint,
    effective_fisher,
    fisher_from_model,
    h_dd_discrepancy,
    qfi_closed_form,
    qfi_matrix,
    tradeoff_ratios,
)
from src.measurement import (
    OUTCOME_LABELS,
    analytic_fisher,
    outcome_probabilities,
    tradeoff_region,
    tradeoff_scan,
    weak_model,
)
from src.device import DeviceConfig, SagnacDevice, calibration_scan, device_probabilities, theta_to_hwp
from src.inference import (
    MaximumLikelihoodEstimator,
    MonteCarloRunner,
    ResidualEstimator,
    derive_rng,
    sample_outcomes,
    simulate_adaptive,
    unwrap_towards,
)
from .schemas import RunConfig

QFI_COLUMNS = ["delta", "h_pp", "h_dd", "h_pp_sld", "h_dd_sld", "h_dd_plus_one", "plus_one_discrepancy"]


def _theta_grid(steps: int) -> np.ndarray:
    return np.linspace(0.0, np.pi / 2, steps)


def cmd_qfi(run: RunConfig) -> pd.DataFrame:
    """Closed-form and SLD-numeric QFI diagonal per delta."""
    rows = []
    for delta in run.delta_grid:
        closed = qfi_closed_form(delta)
        point = ParamPoint(run.phi, delta)
        if delta > 0:
            numeric = qfi_matrix(point)
            h_dd_sld = numeric.h_dd
        else:
            numeric = qfi_matrix(point, parameters=("phi",))
            h_dd_sld = float("nan")
        note = h_dd_discrepancy(delta)
        rows.append({
            "delta": delta,
            "h_pp": closed.h_pp,
            "h_dd": closed.h_dd,
            "h_pp_sld": numeric.h_pp,
            "h_dd_sld": h_dd_sld,
            "h_dd_plus_one": note["plus_one"],
            "plus_one_discrepancy": bool(abs(note["deviation"]) > 1e-12),
        })
    return pd.DataFrame(rows, columns=QFI_COLUMNS)


def cmd_tradeoff(run: RunConfig) -> pd.DataFrame:
    """Effective-Fisher ratios along a strength grid."""
    return tradeoff_scan(run.delta, run.phi, _theta_grid(run.theta_steps))


def cmd_region(run: RunConfig) -> pd.DataFrame:
    """Phase-favoured region on a (delta, theta) grid with its analytic boundary."""
    deltas = run.delta_max * np.arange(1, run.delta_steps + 1) / run.delta_steps
    return tradeoff_region(_theta_grid(run.theta_steps), deltas).to_frame()


def cmd_fisher(run: RunConfig) -> pd.DataFrame:
    """
    Fisher information of the weak scheme and of the three-outcome device at
    one point. The device row uses the HWP2 angle that realises ``run.theta``.
    """
    point = ParamPoint(run.phi, run.delta)
    qfi = qfi_closed_form(run.delta)

    rows = []
    sources = {
        "analytic": analytic_fisher(run.phi, run.delta, run.theta),
        "finite_difference": fisher_from_model(weak_model(run.theta), point),
        "device": fisher_from_model(device_probabilities(theta_to_hwp(run.theta)), point),
    }
    for name, fisher in sources.items():
        f_pp_eff, f_dd_eff = effective_fisher(fisher)
        ratios = tradeoff_ratios(fisher, qfi)
        rows.append({
            "source": name,
            "f_pp": fisher.f_pp,
            "f_dd": fisher.f_dd,
            "f_pd": fisher.f_pd,
            "f_pp_eff": f_pp_eff,
            "f_dd_eff": f_dd_eff,
            "h_pp": qfi.h_pp,
            "h_dd": qfi.h_dd,
            "ratio_phi": ratios.r_phi,
            "ratio_delta": ratios.r_delta,
            "ratio_sum": ratios.total,
        })
    return pd.DataFrame(rows)


def cmd_simulate(run: RunConfig) -> pd.DataFrame:
    """Seeded multinomial counts of the weak scheme."""
    p = outcome_probabilities(run.phi, run.delta, run.theta)
    counts = sample_outcomes(p, run.shots, seed=run.seed, labels=OUTCOME_LABELS)
    return pd.DataFrame({
        "label": list(OUTCOME_LABELS),
        "probability": p,
        "count": [int(c) for c in counts.counts],
    })


def cmd_estimate(run: RunConfig) -> Dict:
    """Simulate counts and estimate (phi, delta), optionally with the two-stage method."""
    truth = ParamPoint(run.phi, run.delta)
    estimator = MaximumLikelihoodEstimator(load_simulation_config().get("estimator", {}))
    if run.adaptive_split is not None:
        estimate = simulate_adaptive(
            truth, run.theta, run.shots, run.adaptive_split, seed=run.seed, estimator=estimator
        )
    else:
        p = outcome_probabilities(truth.phi, truth.delta, run.theta)
        counts = sample_outcomes(p, run.shots, seed=run.seed, labels=OUTCOME_LABELS)
        estimate = estimator.estimate(counts, run.theta)

    report = estimate.to_dict()
    report.update({"truth": truth.to_dict(), "theta": run.theta, "shots": run.shots, "seed": run.seed})
    return report


def cmd_calibrate(run: RunConfig) -> pd.DataFrame:
    """Noiseless calibration curves against the HWP1 angle."""
    return calibration_scan(DeviceConfig(omega_deg=run.omega_deg)).to_frame()


def _with_retries(func, run: RunConfig, label: str):
    """Call ``func(seed)``, reseeding after EstimationError up to the retry budget."""
    for attempt in range(run.retry_budget + 1):
        seed = run.seed if attempt == 0 else int(derive_rng(run.seed, attempt).integers(2**31))
        try:
            return func(seed)
        except EstimationError as e:
            logger.error(f"{label}: attempt {attempt + 1} failed: {e}")
    raise EstimationError(f"{label}: estimation failed after {run.retry_budget + 1} attempts")


def cmd_experiment(run: RunConfig) -> Dict:
    """
    Sweep delta0 over synthesized mixed states.

    Per delta0: a noiseless residual estimate and a noisy Monte Carlo run.

    Returns:
        Dict with the ``sweep`` table, the ``monte_carlo`` reports and the
        per-run ``samples`` table
    """
    sim = load_simulation_config()
    device_config = DeviceConfig(
        omega_deg=run.omega_deg,
        noise_rel_std=run.noise_rel_std,
        merge_output2=True,
    )
    calibration = calibration_scan(device_config)
    residual = ResidualEstimator(calibration, sim.get("estimator", {}))
    noiseless_device = SagnacDevice(device_config.noiseless())
    runner = MonteCarloRunner(
        {"repetitions": run.repetitions, "m_prime": run.m_prime, "method": run.method, "shots": run.shots},
        show_progress=False,
    )

    phi0 = float(np.radians(run.phi0_deg))
    sweep: List[Dict] = []
    reports: List[Dict] = []
    samples: List[pd.DataFrame] = []

    for delta0 in run.delta0_values:
        truth = ParamPoint(phi0, delta0)
        noiseless = residual.estimate(noiseless_device.synthesize(phi0, delta0))

        report = _with_retries(
            lambda seed: runner.run(
                truth,
                repetitions=run.repetitions,
                seed=seed,
                device_config=device_config,
                calibration=calibration,
                estimator_config=sim.get("estimator", {}),
                theta=device_config.theta,
            ),
            run,
            f"delta0={delta0}",
        )
        bound = report.bound
        sweep.append({
            "delta0": delta0,
            "phi_hat_noiseless": unwrap_towards(noiseless.phi_hat, phi0),
            "delta_hat_noiseless": noiseless.delta_hat,
            "phi_hat_mean": report.phi_hat,
            "delta_hat_mean": report.delta_hat,
            "var_phi": report.covariance[0, 0],
            "var_delta": report.covariance[1, 1],
            "cov": report.covariance[0, 1],
            "correlation": report.correlation(),
            "trapped_fraction": report.trapped_fraction,
            "bound_var_phi": bound.var_phi if bound else float("nan"),
            "bound_var_delta": bound.var_delta if bound else float("nan"),
            "bound_cov": bound.cov if bound else float("nan"),
        })
        reports.append(report.to_dict())
        frame = report.samples_frame()
        frame.insert(0, "delta0", delta0)
        samples.append(frame)

    return {
        "sweep": pd.DataFrame(sweep),
        "monte_carlo": reports,
        "samples": pd.concat(samples, ignore_index=True),
    }


COMMAND_TABLE = {
    "qfi": cmd_qfi,
    "tradeoff": cmd_tradeoff,
    "region": cmd_region,
    "fisher": cmd_fisher,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "calibrate": cmd_calibrate,
    "experiment": cmd_experiment,
}


def run_command(run: RunConfig):
    command = COMMAND_TABLE.get(run.command)
    if command is None:
        raise InvalidParameterError(f"Unknown command {run.command!r}")
    logger.info(f"Running command '{run.command}'")
    return command(run)
