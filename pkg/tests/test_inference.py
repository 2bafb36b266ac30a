"""
Tests for sampling, the estimators and the Monte Carlo runner.
"""
import numpy as np
import pytest

from src.exceptions import InvalidParameterError, NonIdentifiableError
from src.estimation import ParamPoint
from src.measurement import OUTCOME_LABELS, outcome_probabilities
from src.device import DeviceConfig, SagnacDevice, device_probabilities
from src.inference import (
    MaximumLikelihoodEstimator,
    MonteCarloRunner,
    OutcomeCounts,
    ResidualEstimator,
    adaptive_two_step,
    derive_rng,
    expected_counts,
    is_trapped,
    label_mask,
    mle_estimate,
    monte_carlo_covariance,
    residual_estimate,
    sample_outcomes,
    simulate_adaptive,
    simulate_counts,
    unwrap_towards,
    wrap_phase,
)


def weak_counts(phi, delta, theta, shots=10000, offset=0.0):
    return expected_counts(outcome_probabilities(phi - offset, delta, theta), shots, OUTCOME_LABELS)


# Sampling

def test_sample_outcomes_deterministic_distribution():
    counts = sample_outcomes([0.0, 1.0, 0.0], 500, seed=1)
    assert counts.counts == (0, 500, 0)
    assert counts.labels == ("0", "1", "2")


def test_sample_outcomes_statistics():
    p = outcome_probabilities(0.3, 0.2, 0.9)
    shots = 100000
    counts = sample_outcomes(p, shots, seed=11, labels=OUTCOME_LABELS).as_array()

    assert counts.sum() == shots
    sigma = np.sqrt(shots * p * (1 - p))
    assert np.all(np.abs(counts - shots * p) < 5 * sigma)


def test_sample_outcomes_is_seeded():
    p = outcome_probabilities(0.3, 0.2, 0.9)
    assert sample_outcomes(p, 1000, seed=5) == sample_outcomes(p, 1000, seed=5)
    assert sample_outcomes(p, 1000, seed=[5, 0]) != sample_outcomes(p, 1000, seed=[5, 1])


@pytest.mark.parametrize("distribution,shots", [
    ([0.5, 0.5], 0),
    ([0.5, 0.5], 2.5),
    ([0.5, 0.6], 10),
    ([1.2, -0.2], 10),
])
def test_sample_outcomes_rejects_bad_input(distribution, shots):
    with pytest.raises(InvalidParameterError):
        sample_outcomes(distribution, shots)


def test_sample_outcomes_rejects_label_mismatch():
    with pytest.raises(InvalidParameterError):
        sample_outcomes([0.5, 0.5], 10, labels=["a"])


def test_outcome_counts_validation():
    with pytest.raises(InvalidParameterError):
        OutcomeCounts(labels=("++", "++"), counts=(1, 2))
    with pytest.raises(InvalidParameterError):
        OutcomeCounts(labels=("++", "+-"), counts=(1, -2))
    with pytest.raises(InvalidParameterError):
        OutcomeCounts(labels=("++", "+-"), counts=(0, 0))
    with pytest.raises(InvalidParameterError):
        OutcomeCounts(labels=("++",), counts=(1, 2))


def test_outcome_counts_dict_round_trip():
    counts = OutcomeCounts.from_dict({"++": 3, "-+": 1})
    assert counts.shots == 4.0
    assert counts.to_dict() == {"++": 3.0, "-+": 1.0}
    np.testing.assert_allclose(counts.frequencies(), [0.75, 0.25])


def test_derive_rng_streams_differ():
    a = derive_rng(42, 0).random(5)
    b = derive_rng(42, 1).random(5)
    np.testing.assert_array_equal(a, derive_rng(42, 0).random(5))
    assert not np.allclose(a, b)


# Phase helpers

def test_wrap_phase():
    assert wrap_phase(np.pi) == pytest.approx(np.pi)
    assert wrap_phase(-np.pi) == pytest.approx(np.pi)
    assert wrap_phase(1.5 * np.pi) == pytest.approx(-0.5 * np.pi)
    assert wrap_phase(0.2 + 4 * np.pi) == pytest.approx(0.2)
    assert wrap_phase(0.5, lower=1.0) == pytest.approx(0.5 + 2 * np.pi)


def test_unwrap_towards():
    assert unwrap_towards(-np.pi + 0.1, np.pi) == pytest.approx(np.pi + 0.1)
    assert unwrap_towards(0.3, 0.0) == pytest.approx(0.3)


def test_label_mask():
    np.testing.assert_array_equal(label_mask("++"), [1, 0, 0, 0])
    np.testing.assert_array_equal(label_mask("*-"), [0, 1, 0, 1])
    np.testing.assert_array_equal(label_mask("**"), [1, 1, 1, 1])
    for bad in ["+", "x+", "+++"]:
        with pytest.raises(InvalidParameterError):
            label_mask(bad)


# Maximum likelihood

@pytest.fixture(scope="module")
def mle(estimator_config):
    return MaximumLikelihoodEstimator(estimator_config)


def test_mle_recovers_truth_from_expected_counts(mle):
    estimate = mle.estimate(weak_counts(0.3, 0.2, np.pi / 4), np.pi / 4)

    assert estimate.phi_hat == pytest.approx(0.3, abs=1e-5)
    assert estimate.delta_hat == pytest.approx(0.2, abs=1e-5)
    assert not estimate.trapped_at_zero
    assert not estimate.at_domain_edge
    assert estimate.n_evaluations > 0


@pytest.mark.parametrize("theta", [np.pi / 6, np.pi / 4, np.pi / 3])
@pytest.mark.parametrize("phi", [-2.5, 0.3, 1.9])
@pytest.mark.parametrize("delta", [0.2, 0.7, 1.5])
def test_mle_recovery_grid(mle, phi, delta, theta):
    estimate = mle.estimate(weak_counts(phi, delta, theta), theta)
    assert estimate.phi_hat == pytest.approx(phi, abs=1e-4)
    assert estimate.delta_hat == pytest.approx(delta, abs=1e-4)


def test_mle_log_likelihood_is_maximal_at_estimate(mle):
    counts = sample_outcomes(outcome_probabilities(0.4, 0.5, 0.8), 20000, seed=3, labels=OUTCOME_LABELS)
    estimate = mle.estimate(counts, 0.8)

    at_truth = np.sum(counts.as_array() * np.log(outcome_probabilities(0.4, 0.5, 0.8)))
    assert estimate.log_likelihood >= at_truth


def test_mle_trapped_at_zero_for_pure_state(mle):
    estimate = mle.estimate(weak_counts(0.3, 0.0, np.pi / 4), np.pi / 4)
    assert estimate.trapped_at_zero
    assert estimate.phi_hat == pytest.approx(0.3, abs=1e-5)


def test_is_trapped_needs_a_distant_start():
    assert is_trapped(1e-5, [0.0, 0.034, 0.068], 1e-3, 0.05)
    assert not is_trapped(1e-5, [0.0, 0.034], 1e-3, 0.05)
    assert not is_trapped(0.2, [0.0, 0.5], 1e-3, 0.05)


def test_mle_pure_state_flagged_when_a_start_sits_away_from_zero(estimator_config):
    # Four phase nodes and delta nodes 0.5 apart: the runner-up cells are (0, 0.5) and (0, 1.0)
    config = {**estimator_config, "grid_phi": 4, "grid_delta": 5}
    estimate = MaximumLikelihoodEstimator(config).estimate(weak_counts(0.0, 0.0, np.pi / 4), np.pi / 4)

    assert estimate.delta_hat < 1e-3
    assert estimate.trapped_at_zero


def test_mle_pure_state_not_flagged_without_competing_start(estimator_config):
    # Delta nodes 0.005 apart keep every start close to delta = 0
    config = {**estimator_config, "grid_phi": 4, "grid_delta": 401}
    estimate = MaximumLikelihoodEstimator(config).estimate(weak_counts(0.0, 0.0, np.pi / 4), np.pi / 4)

    assert estimate.delta_hat < 1e-3
    assert estimate.phi_hat == pytest.approx(0.0, abs=1e-5)
    assert not estimate.trapped_at_zero


def test_mle_uniform_counts_hit_domain_edge(mle):
    counts = OutcomeCounts(labels=OUTCOME_LABELS, counts=(25, 25, 25, 25))
    estimate = mle.estimate(counts, np.pi / 4)
    assert estimate.at_domain_edge
    assert estimate.delta_hat == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("theta", [0.0, np.pi / 2])
def test_mle_rejects_edge_strengths(mle, theta):
    with pytest.raises(NonIdentifiableError):
        mle.estimate(weak_counts(0.3, 0.2, np.pi / 4), theta)


def test_mle_rejects_bad_search_domain(mle):
    with pytest.raises(InvalidParameterError):
        mle.estimate(weak_counts(0.3, 0.2, np.pi / 4), np.pi / 4, search_domain=(1.0, 0.0))


def test_mle_rejects_bad_config():
    with pytest.raises(InvalidParameterError):
        MaximumLikelihoodEstimator({"grid_phi": 1})
    with pytest.raises(InvalidParameterError):
        MaximumLikelihoodEstimator({"delta_min": 1.0, "delta_max": 0.5})


def test_mle_invariant_under_label_order(mle):
    counts = weak_counts(-1.1, 0.6, 1.0)
    reordered = OutcomeCounts.from_dict(dict(reversed(list(counts.to_dict().items()))))

    first = mle.estimate(counts, 1.0)
    second = mle.estimate(reordered, 1.0)
    assert second.phi_hat == pytest.approx(first.phi_hat, abs=1e-7)
    assert second.delta_hat == pytest.approx(first.delta_hat, abs=1e-7)


def test_mle_merged_device_outcomes(mle):
    """Three device channels still identify both parameters."""
    omega = 8.0
    device = SagnacDevice(DeviceConfig(omega_deg=omega))
    p = device_probabilities(omega)(0.9, 0.4)
    counts = expected_counts(p, 10000, ("++", "-+", "*-"))

    estimate = mle.estimate(counts, device.theta)
    assert estimate.phi_hat == pytest.approx(0.9, abs=1e-5)
    assert estimate.delta_hat == pytest.approx(0.4, abs=1e-5)


def test_mle_rejects_overlapping_labels(mle):
    counts = OutcomeCounts(labels=("++", "*+"), counts=(3, 5))
    with pytest.raises(InvalidParameterError):
        mle.estimate(counts, np.pi / 4)


def test_mle_frame_offset(mle):
    counts = weak_counts(0.3, 0.5, np.pi / 4, offset=1.0)
    estimate = mle.estimate(counts, np.pi / 4, frame_offset=1.0)
    assert estimate.phi_hat == pytest.approx(0.3, abs=1e-5)
    assert estimate.delta_hat == pytest.approx(0.5, abs=1e-5)


def test_mle_estimate_wrapper(estimator_config):
    estimate = mle_estimate(weak_counts(1.2, 0.3, 0.7), 0.7, config=estimator_config)
    assert estimate.phi_hat == pytest.approx(1.2, abs=1e-5)
    assert set(estimate.to_dict()) >= {"phi_hat", "delta_hat", "converged", "trapped_at_zero", "at_domain_edge"}


# Minimal residual

def test_residual_recovers_noiseless_truth(calibration, estimator_config):
    phi0 = np.radians(182.0)
    record = SagnacDevice(DeviceConfig(omega_deg=8.0)).synthesize(phi0, 0.3)

    estimate = ResidualEstimator(calibration, estimator_config).estimate(record)
    assert unwrap_towards(estimate.phi_hat, phi0) == pytest.approx(phi0, abs=1e-6)
    assert estimate.delta_hat == pytest.approx(0.3, abs=1e-6)
    assert -np.pi < estimate.phi_hat <= np.pi
    assert estimate.log_likelihood == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("delta0", [0.1, 0.6, 1.0])
def test_residual_tracks_diffusion(calibration, estimator_config, delta0):
    record = SagnacDevice(DeviceConfig(omega_deg=8.0)).synthesize(np.radians(182.0), delta0)
    estimate = residual_estimate(record, calibration, estimator_config)
    assert estimate.delta_hat == pytest.approx(delta0, abs=1e-5)


def test_residual_fully_mixed_record_hits_edge(calibration, estimator_config):
    record = SagnacDevice(DeviceConfig(omega_deg=8.0)).synthesize(0.5, 20.0)
    estimate = ResidualEstimator(calibration, estimator_config).estimate(record)
    assert estimate.at_domain_edge


def test_residual_requires_calibration(estimator_config):
    with pytest.raises(InvalidParameterError):
        ResidualEstimator(None, estimator_config)


# Adaptive estimation

def test_adaptive_two_step_rotates_frame(mle):
    truth = ParamPoint(0.6, 0.3)
    theta = np.pi / 4
    calls = []

    def sampler(offset, shots):
        calls.append((offset, shots))
        return weak_counts(truth.phi, truth.delta, theta, shots=shots, offset=offset)

    stage1 = weak_counts(truth.phi, truth.delta, theta, shots=1000)
    estimate = adaptive_two_step(stage1, 0.25, theta, sampler, estimator=mle)

    assert len(calls) == 1
    offset, shots = calls[0]
    assert shots == 3000
    assert offset == pytest.approx(truth.phi, abs=1e-5)
    assert estimate.phi_hat == pytest.approx(truth.phi, abs=1e-5)
    assert estimate.delta_hat == pytest.approx(truth.delta, abs=1e-5)


def test_simulate_adaptive_recovers_truth(mle):
    estimate = simulate_adaptive(ParamPoint(0.6, 0.3), np.pi / 4, 200000, 0.2, seed=7, estimator=mle)
    assert estimate.phi_hat == pytest.approx(0.6, abs=0.05)
    assert estimate.delta_hat == pytest.approx(0.3, abs=0.05)


@pytest.mark.parametrize("split", [0.0, 1.0, -0.2])
def test_adaptive_rejects_bad_split(mle, split):
    stage1 = weak_counts(0.6, 0.3, np.pi / 4, shots=100)
    with pytest.raises(InvalidParameterError):
        adaptive_two_step(stage1, split, np.pi / 4, lambda offset, n: stage1, estimator=mle)


def test_simulate_adaptive_rejects_tiny_budget(mle):
    with pytest.raises(InvalidParameterError):
        simulate_adaptive(ParamPoint(0.6, 0.3), np.pi / 4, 1, 0.5, seed=1, estimator=mle)


# Monte Carlo

def residual_runner(repetitions):
    config = {"repetitions": repetitions, "method": "residual", "m_prime": 400000}
    return MonteCarloRunner(config, max_workers=2, show_progress=False)


def test_monte_carlo_rejects_unknown_method():
    with pytest.raises(InvalidParameterError):
        MonteCarloRunner({"method": "bayes"}, show_progress=False)


def test_monte_carlo_rejects_single_repetition(calibration, estimator_config):
    with pytest.raises(InvalidParameterError):
        residual_runner(1).run(
            ParamPoint(np.radians(182.0), 0.25),
            device_config=DeviceConfig(omega_deg=8.0),
            calibration=calibration,
            estimator_config=estimator_config,
        )


@pytest.mark.slow
def test_monte_carlo_without_noise_has_zero_covariance(calibration, estimator_config):
    truth = ParamPoint(np.radians(182.0), 0.25)
    report = residual_runner(4).run(
        truth,
        seed=1,
        device_config=DeviceConfig(omega_deg=8.0),
        calibration=calibration,
        estimator_config=estimator_config,
    )

    np.testing.assert_allclose(report.covariance, np.zeros((2, 2)), atol=1e-20)
    np.testing.assert_array_equal(report.phi_samples, report.phi_samples[0])
    assert report.phi_hat == pytest.approx(truth.phi, abs=1e-6)
    assert report.bound is not None
    assert report.to_dict()["seeds"]["root"] == 1
    assert list(report.samples_frame().columns) == ["run", "phi_hat", "delta_hat", "trapped"]


@pytest.mark.slow
def test_monte_carlo_is_reproducible(calibration, device_config, estimator_config):
    truth = ParamPoint(np.radians(182.0), 0.25)
    kwargs = dict(seed=9, device_config=device_config, calibration=calibration, estimator_config=estimator_config)

    first = residual_runner(6).run(truth, **kwargs)
    second = MonteCarloRunner(
        {"repetitions": 6, "method": "residual", "m_prime": 400000}, max_workers=1, show_progress=False
    ).run(truth, **kwargs)
    np.testing.assert_array_equal(first.phi_samples, second.phi_samples)
    np.testing.assert_array_equal(first.delta_samples, second.delta_samples)


@pytest.mark.slow
def test_monte_carlo_trapping_depends_on_diffusion(calibration, device_config, estimator_config):
    kwargs = dict(seed=3, device_config=device_config, calibration=calibration, estimator_config=estimator_config)
    runner = residual_runner(100)

    weak = runner.run(ParamPoint(np.radians(182.0), 0.03), **kwargs)
    strong = runner.run(ParamPoint(np.radians(182.0), 0.3), **kwargs)

    assert weak.trapped_fraction > 0
    assert strong.trapped_fraction == 0


@pytest.mark.slow
def test_monte_carlo_ellipse_flattens_with_diffusion(calibration, device_config, estimator_config):
    kwargs = dict(seed=5, device_config=device_config, calibration=calibration, estimator_config=estimator_config)
    runner = residual_runner(60)

    small = runner.run(ParamPoint(np.radians(182.0), 0.094), **kwargs)
    large = runner.run(ParamPoint(np.radians(182.0), 0.25), **kwargs)

    assert small.aspect_ratio() >= 2 * large.aspect_ratio()


@pytest.mark.slow
def test_mle_monte_carlo_is_efficient(estimator_config):
    truth = ParamPoint(0.6, 0.5)
    runner = MonteCarloRunner(
        {"repetitions": 200, "method": "mle", "shots": 20000}, max_workers=4, show_progress=False
    )
    report = runner.run(truth, seed=2, estimator_config=estimator_config, theta=np.pi / 4)

    assert report.m_prime == 20000
    assert report.n_failed == 0
    efficiency = np.diag(report.covariance) / np.array([report.bound.var_phi, report.bound.var_delta])
    assert np.all((efficiency > 0.7) & (efficiency < 1.4))


@pytest.mark.slow
def test_adaptive_lowers_phase_error(estimator_config):
    """At theta = pi/4 moving stage 2 to phi = 0 raises the effective phase information."""
    truth = ParamPoint(0.6, 0.3)
    theta, shots = np.pi / 4, 20000
    mle = MaximumLikelihoodEstimator(estimator_config)
    runner = MonteCarloRunner({"method": "mle", "shots": shots}, max_workers=4, show_progress=False)

    def fixed(rng):
        return mle.estimate(simulate_counts(truth, theta, shots, rng), theta)

    def adaptive(rng):
        return simulate_adaptive(truth, theta, shots, 0.2, seed=rng, estimator=mle)

    phi_fixed, _, _, _ = runner.run_trials(fixed, truth, 400, seed=21)
    phi_adaptive, _, _, _ = runner.run_trials(adaptive, truth, 400, seed=22)

    assert np.mean((phi_adaptive - truth.phi) ** 2) < np.mean((phi_fixed - truth.phi) ** 2)


@pytest.mark.slow
def test_adaptive_lowers_diffusion_error(estimator_config):
    """At theta = 1.3 the effective delta information at phi = 0 is several times that at phi = 0.6."""
    truth = ParamPoint(0.6, 0.3)
    theta, shots = 1.3, 20000
    mle = MaximumLikelihoodEstimator(estimator_config)
    runner = MonteCarloRunner({"method": "mle", "shots": shots}, max_workers=4, show_progress=False)

    def fixed(rng):
        return mle.estimate(simulate_counts(truth, theta, shots, rng), theta)

    def adaptive(rng):
        return simulate_adaptive(truth, theta, shots, 0.1, seed=rng, estimator=mle)

    _, delta_fixed, _, _ = runner.run_trials(fixed, truth, 300, seed=31)
    _, delta_adaptive, _, _ = runner.run_trials(adaptive, truth, 300, seed=32)

    assert np.mean((delta_adaptive - truth.delta) ** 2) < 0.5 * np.mean((delta_fixed - truth.delta) ** 2)


@pytest.mark.slow
def test_mle_saturates_bound_at_zero_phase(estimator_config):
    """At phi = 0 the Fisher matrix is diagonal: efficient variances and uncorrelated errors."""
    repetitions = 2000
    runner = MonteCarloRunner(
        {"repetitions": repetitions, "method": "mle", "shots": 100000}, max_workers=4, show_progress=False
    )
    report = runner.run(ParamPoint(0.0, 0.3), seed=8, estimator_config=estimator_config, theta=np.pi / 4)

    assert report.n_failed == 0
    efficiency = np.diag(report.covariance) / np.array([report.bound.var_phi, report.bound.var_delta])
    assert np.all((efficiency >= 0.9) & (efficiency <= 1.3))
    assert abs(report.correlation()) < 3 / np.sqrt(repetitions - 1)


@pytest.mark.slow
def test_monte_carlo_covariance_wrapper(calibration, estimator_config):
    truth = ParamPoint(np.radians(182.0), 0.3)
    report = monte_carlo_covariance(
        truth,
        {"repetitions": 3, "method": "residual", "m_prime": 400000},
        seed=4,
        device_config=DeviceConfig(omega_deg=8.0, noise_rel_std=0.01),
        calibration=calibration,
        estimator_config=estimator_config,
    )

    assert report.repetitions == 3
    assert report.seeds == {"root": 4, "derivation": "default_rng([root, index])", "count": 3}
    assert report.bound.shots == 400000
    assert report.delta_hat == pytest.approx(0.3, abs=0.05)
