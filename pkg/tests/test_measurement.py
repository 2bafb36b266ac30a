"""
Tests for the weak-measurement scheme, POVMs and trade-off scans.
"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.exceptions import InvalidParameterError, NonIdentifiableError
from src.estimation import (
    ParamPoint,
    fisher_from_model,
    qfi_closed_form,
    tradeoff_ratios,
)
from src.qubit import dephased_state, pauli
from src.measurement import (
    OUTCOME_LABELS,
    Effect,
    MeasurementStrength,
    Povm,
    TRADEOFF_COLUMNS,
    analytic_fisher,
    favoured_widths,
    fisher_components,
    merged_povm,
    outcome_probabilities,
    projective_mixture_povm,
    random_povm,
    tradeoff_boundary,
    tradeoff_region,
    tradeoff_scan,
    trivial_povm,
    weak_model,
    weak_operators,
    weak_scheme_povm,
)

HALF_PI = np.pi / 2

phis = st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False)
thetas = st.floats(min_value=0.0, max_value=HALF_PI, allow_nan=False)
mixed_deltas = st.floats(min_value=0.01, max_value=2.0, allow_nan=False)


# Measurement strength and operators

def test_measurement_strength_range():
    assert MeasurementStrength(HALF_PI).degrees == pytest.approx(90.0)
    with pytest.raises(InvalidParameterError):
        MeasurementStrength(-0.1)
    with pytest.raises(InvalidParameterError):
        MeasurementStrength(HALF_PI + 0.01)


@pytest.mark.parametrize("theta", [0.0, np.pi / 6, np.pi / 3, HALF_PI])
def test_weak_operators_complete(theta):
    m_plus, m_minus = weak_operators(theta)
    total = m_plus.conj().T @ m_plus + m_minus.conj().T @ m_minus
    np.testing.assert_allclose(total, np.eye(2), atol=1e-12)


def test_weak_operators_limits():
    """theta = 0 does nothing; theta = pi/2 projects on the sigma_z eigenstates."""
    m_plus, m_minus = weak_operators(0.0)
    np.testing.assert_allclose(m_plus, np.eye(2) / np.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(m_minus, np.eye(2) / np.sqrt(2), atol=1e-15)

    m_plus, m_minus = weak_operators(HALF_PI)
    np.testing.assert_allclose(m_plus, np.diag([1.0, 0.0]), atol=1e-15)
    np.testing.assert_allclose(m_minus, np.diag([0.0, 1.0]), atol=1e-15)


def test_weak_operators_diagonal_at_pi_over_3():
    m_plus, _ = weak_operators(np.pi / 3)
    c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
    assert np.real(np.diag(m_plus)) == pytest.approx([(c + s) / np.sqrt(2), (c - s) / np.sqrt(2)])


def test_weak_operators_reject_out_of_range():
    with pytest.raises(InvalidParameterError):
        weak_operators(2.0)


# POVMs

def test_weak_scheme_povm_structure():
    povm = weak_scheme_povm(np.pi / 4)

    assert povm.labels == list(OUTCOME_LABELS)
    np.testing.assert_allclose(sum(povm.matrices()), np.eye(2), atol=1e-12)
    for effect in povm:
        values = np.linalg.eigvalsh(effect.matrix)
        assert values == pytest.approx([0.0, 0.5], abs=1e-12)


def test_weak_scheme_effect_direction_at_pi_over_4():
    """E(+,+) = (I + n.sigma)/4 with n = (sqrt2/2, -sqrt2/2, 0)."""
    effect = weak_scheme_povm(np.pi / 4).effects[0]
    r = np.sqrt(2) / 2
    expected = 0.25 * (pauli(0) + r * pauli("x") - r * pauli("y"))
    np.testing.assert_allclose(effect.matrix, expected, atol=1e-12)


def test_weak_scheme_strong_limit_aligns_branches():
    povm = weak_scheme_povm(HALF_PI)
    e = {effect.label: effect.matrix for effect in povm}
    np.testing.assert_allclose(e["++"], e["-+"], atol=1e-12)
    np.testing.assert_allclose(e["++"] + e["-+"], 0.5 * (pauli(0) + pauli("x")), atol=1e-12)


def test_povm_validation():
    with pytest.raises(InvalidParameterError):
        Povm([Effect(0.5 * pauli(0), "a"), Effect(0.25 * pauli(0), "b")])
    with pytest.raises(InvalidParameterError):
        Povm([Effect(0.5 * pauli(0), "a"), Effect(0.5 * pauli(0), "a")])
    with pytest.raises(InvalidParameterError):
        Effect(pauli("z"), "not-positive")


def test_povm_distribution_labels():
    povm = weak_scheme_povm(0.9)
    distribution = povm.distribution(dephased_state(0.3, 0.2))
    assert list(distribution) == list(OUTCOME_LABELS)
    assert sum(distribution.values()) == pytest.approx(1.0)


def test_merged_povm():
    povm = merged_povm(1.0)
    assert povm.labels == ["++", "-+", "*-"]

    state = dephased_state(0.4, 0.3)
    p = outcome_probabilities(0.4, 0.3, 1.0)
    assert povm.probabilities(state) == pytest.approx([p[0], p[2], p[1] + p[3]], abs=1e-12)


def test_merge_rejects_unknown_label():
    with pytest.raises(InvalidParameterError):
        weak_scheme_povm(1.0).merge({"x": ["++", "??"]})


def test_merged_povm_loses_information():
    point = ParamPoint(0.4, 0.3)
    full = weak_scheme_povm(1.0).fisher(point).as_array()
    merged = merged_povm(1.0).fisher(point).as_array()
    assert np.linalg.eigvalsh(full - merged)[0] >= -1e-12


def test_projective_mixture_endpoints():
    only_y = projective_mixture_povm(1.0)
    assert only_y.labels == ["y+", "y-"]
    np.testing.assert_allclose(only_y.effects[0].matrix, 0.5 * (pauli(0) + pauli("y")), atol=1e-15)

    only_x = projective_mixture_povm(0.0)
    assert only_x.labels == ["x+", "x-"]
    np.testing.assert_allclose(only_x.effects[1].matrix, 0.5 * (pauli(0) - pauli("x")), atol=1e-15)

    with pytest.raises(InvalidParameterError):
        projective_mixture_povm(1.5)


def test_projective_mixture_half_splits_qfi():
    point = ParamPoint(0.0, 0.7)
    fisher = projective_mixture_povm(0.5).fisher(point)
    qfi = qfi_closed_form(0.7)

    assert fisher.f_pp == pytest.approx(qfi.h_pp / 2, abs=1e-12)
    assert fisher.f_dd == pytest.approx(qfi.h_dd / 2, abs=1e-12)
    assert fisher.f_pd == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_projective_mixture_saturates_at_zero_phase(t):
    fisher = projective_mixture_povm(t).fisher(ParamPoint(0.0, 0.8))
    ratios = tradeoff_ratios(fisher, qfi_closed_form(0.8))
    assert ratios.total == pytest.approx(1.0, abs=1e-9)


def test_trivial_povm_carries_no_information():
    fisher = trivial_povm().fisher(ParamPoint(0.5, 0.5))
    ratios = tradeoff_ratios(fisher, qfi_closed_form(0.5))
    assert ratios.total == pytest.approx(0.0, abs=1e-15)


def test_random_povm_is_valid():
    rng = np.random.default_rng(7)
    for _ in range(50):
        povm = random_povm(rng)
        assert 2 <= len(povm) <= 4
        np.testing.assert_allclose(sum(povm.matrices()), np.eye(2), atol=1e-10)
        for effect in povm:
            assert np.linalg.eigvalsh(effect.matrix)[0] >= -1e-12

    with pytest.raises(InvalidParameterError):
        random_povm(rng, n_effects=5)


# Outcome distribution

def test_outcome_probabilities_regression():
    p = outcome_probabilities(0.3, 0.2, 0.9)
    assert p == pytest.approx([0.3856256314, 0.1143743686, 0.4738733277, 0.0261266723], abs=1e-9)


def test_outcome_probabilities_limits():
    assert outcome_probabilities(0.0, 20.0, 0.7) == pytest.approx([0.25] * 4, abs=1e-12)
    assert outcome_probabilities(0.0, 0.0, HALF_PI) == pytest.approx([0.5, 0.0, 0.5, 0.0], abs=1e-12)


def test_outcome_probabilities_broadcast():
    p = outcome_probabilities(np.linspace(0, 1, 5)[:, None], np.array([0.1, 0.5, 1.0])[None, :], 0.6)
    assert p.shape == (5, 3, 4)
    np.testing.assert_allclose(p.sum(axis=-1), 1.0, atol=1e-12)


def test_outcome_probabilities_reject_negative_delta():
    with pytest.raises(InvalidParameterError):
        outcome_probabilities(0.0, -0.1, 0.5)


@given(phis, st.floats(min_value=0.0, max_value=3.0), thetas)
@settings(deadline=None)
def test_outcome_probabilities_match_born_rule(phi, delta, theta):
    born = weak_scheme_povm(theta).probabilities(dephased_state(phi, delta))
    np.testing.assert_allclose(outcome_probabilities(phi, delta, theta), born, atol=1e-12)


def test_outcome_distribution_is_two_pi_periodic_only():
    p = outcome_probabilities(0.4, 0.3, 1.0)
    np.testing.assert_allclose(outcome_probabilities(0.4 + 2 * np.pi, 0.3, 1.0), p, atol=1e-12)
    shifted = outcome_probabilities(0.4 + np.pi, 0.3, 1.0)
    # phi + pi swaps s = + and s = -
    np.testing.assert_allclose(shifted[[1, 0, 3, 2]], p, atol=1e-12)


# Fisher information of the weak scheme

def test_analytic_fisher_values():
    assert analytic_fisher(0.0, 1.0, np.pi / 4).f_pp == pytest.approx(0.072579, abs=1e-6)
    assert analytic_fisher(0.0, 0.6, HALF_PI).f_pp == pytest.approx(0.0, abs=1e-15)
    assert analytic_fisher(0.0, 1.0, HALF_PI).f_dd == pytest.approx(4 / (np.e ** 2 - 1), abs=1e-12)


def test_analytic_fisher_at_zero_delta():
    fisher = analytic_fisher(0.3, 0.0, 0.8)
    assert fisher.f_dd == 0.0
    assert fisher.f_pd == 0.0
    assert fisher.f_pp > 0


def test_analytic_fisher_pure_state_on_axis():
    """delta = 0, theta = pi/2: both branches have zero denominators."""
    fisher = analytic_fisher(0.0, 0.0, HALF_PI)
    assert np.isfinite(fisher.as_array()).all()
    assert fisher.f_pp == pytest.approx(0.0, abs=1e-15)


def test_analytic_fisher_matches_finite_differences():
    grid_phi = np.linspace(-np.pi, np.pi, 20)
    grid_delta = np.linspace(0.05, 2.0, 20)
    grid_theta = np.linspace(0.0, HALF_PI, 20)

    for theta in grid_theta:
        model = weak_model(theta)
        for phi in grid_phi:
            for delta in grid_delta:
                numeric = fisher_from_model(model, ParamPoint(phi, delta), step=1e-5)
                exact = analytic_fisher(phi, delta, theta)
                np.testing.assert_allclose(numeric.as_array(), exact.as_array(), atol=1e-6)


def test_fisher_components_vectorized():
    deltas = np.linspace(0.1, 1.5, 6)
    f_pp, f_dd, f_pd = fisher_components(0.4, deltas, 0.9)
    for k, delta in enumerate(deltas):
        fisher = analytic_fisher(0.4, delta, 0.9)
        assert (f_pp[k], f_dd[k], f_pd[k]) == pytest.approx((fisher.f_pp, fisher.f_dd, fisher.f_pd))


@given(phis, mixed_deltas, thetas)
def test_weak_scheme_saturates_tradeoff(phi, delta, theta):
    ratios = tradeoff_ratios(analytic_fisher(phi, delta, theta), qfi_closed_form(delta))
    assert ratios.total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_correlation_vanishes_at_quarter_periods(k, parameter_grid):
    _, deltas, thetas = parameter_grid
    for theta in thetas:
        _, _, f_pd = fisher_components(k * HALF_PI, deltas, theta)
        assert np.max(np.abs(f_pd)) < 1e-10


@given(phis, mixed_deltas, thetas)
def test_fisher_symmetries(phi, delta, theta):
    """F_pd is odd in phi; every entry is pi periodic."""
    f = analytic_fisher(phi, delta, theta)
    mirrored = analytic_fisher(-phi, delta, theta)
    shifted = analytic_fisher(phi + np.pi, delta, theta)

    assert mirrored.f_pd == pytest.approx(-f.f_pd, abs=1e-10)
    np.testing.assert_allclose(shifted.as_array(), f.as_array(), atol=1e-10)
    assert f.is_psd()


def test_weak_scheme_dominated_by_qfi(parameter_grid):
    phis_grid, deltas, thetas = parameter_grid
    for delta in deltas:
        h = qfi_closed_form(delta).as_array()
        for phi in phis_grid:
            for theta in thetas:
                gap = h - analytic_fisher(phi, delta, theta).as_array()
                assert np.linalg.eigvalsh(gap)[0] >= -1e-9


def test_random_povms_respect_bounds():
    """H - F is PSD and the trade-off sums stay below one for random POVMs."""
    rng = np.random.default_rng(20150601)
    for _ in range(1000):
        povm = random_povm(rng)
        point = ParamPoint(float(rng.uniform(-np.pi, np.pi)), float(rng.uniform(0.05, 2.0)))
        fisher = povm.fisher(point)
        qfi = qfi_closed_form(point.delta)

        assert np.linalg.eigvalsh(qfi.as_array() - fisher.as_array())[0] >= -1e-9
        plain = tradeoff_ratios(fisher, qfi)
        assert plain.total <= 1 + 1e-9
        try:
            effective = tradeoff_ratios(fisher, qfi, effective=True)
        except NonIdentifiableError:
            continue
        assert effective.total <= plain.total + 1e-12


# Trade-off scans

def test_tradeoff_scan_endpoints():
    scan = tradeoff_scan(0.1, 0.0, [0.0, HALF_PI])
    assert list(scan.columns) == TRADEOFF_COLUMNS
    assert scan.loc[0, ["ratio_phi", "ratio_delta"]].tolist() == pytest.approx([1.0, 0.0], abs=1e-12)
    assert scan.loc[1, ["ratio_phi", "ratio_delta"]].tolist() == pytest.approx([0.0, 1.0], abs=1e-12)


@pytest.mark.parametrize("delta", [0.1, 1.0])
def test_tradeoff_scan_sums_to_one_at_zero_phase(delta):
    scan = tradeoff_scan(delta, 0.0, np.linspace(0, HALF_PI, 91))
    np.testing.assert_allclose(scan["ratio_sum"], 1.0, atol=1e-10)


def test_tradeoff_scan_effective_ratios_drop_off_axis():
    scan = tradeoff_scan(0.5, 0.6, np.linspace(0.1, 1.4, 14))
    assert (scan["ratio_sum"] <= 1 + 1e-9).all()
    assert (scan["ratio_sum"] < 1 - 1e-6).any()


def test_tradeoff_scan_validation():
    with pytest.raises(InvalidParameterError):
        tradeoff_scan(0.0, 0.0, [0.5])
    with pytest.raises(InvalidParameterError):
        tradeoff_scan(0.5, 0.0, [2.0])
    with pytest.raises(InvalidParameterError):
        tradeoff_scan(0.5, 0.0, [])


def test_tradeoff_crossing_at_unit_delta():
    theta_star = tradeoff_boundary(1.0)
    q2 = np.exp(-2.0)
    assert theta_star == pytest.approx(np.arccos(np.sqrt((1 - q2) / (2 - q2))), abs=1e-12)
    assert theta_star == pytest.approx(0.8217, abs=1e-4)

    ratio = tradeoff_scan(1.0, 0.0, [theta_star])["ratio_phi"].iloc[0]
    assert ratio == pytest.approx(0.5, abs=1e-9)

    # bisection on the scan lands on the analytic crossing
    lo, hi = 0.1, 1.5
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tradeoff_scan(1.0, 0.0, [mid])["ratio_phi"].iloc[0] > 0.5:
            lo = mid
        else:
            hi = mid
    assert 0.5 * (lo + hi) == pytest.approx(theta_star, abs=1e-6)


def test_tradeoff_boundary_limits_and_monotonicity():
    assert tradeoff_boundary(1e-4) == pytest.approx(HALF_PI, abs=1e-3)
    assert tradeoff_boundary(0.01) > HALF_PI - 0.02
    assert tradeoff_boundary(3.0) == pytest.approx(np.pi / 4, abs=1e-3)

    boundary = tradeoff_boundary(np.linspace(0.01, 3.0, 100))
    assert np.all(np.diff(boundary) <= 0)
    with pytest.raises(InvalidParameterError):
        tradeoff_boundary(-1.0)


def test_favoured_widths_balanced_at_unit_delta():
    phase_width, diffusion_width = favoured_widths(1.0)
    assert phase_width == pytest.approx(0.8217, abs=1e-4)
    assert diffusion_width == pytest.approx(0.7491, abs=1e-4)
    assert abs(phase_width - diffusion_width) / max(phase_width, diffusion_width) < 0.1


def test_tradeoff_region_matches_boundary():
    thetas = np.linspace(0, HALF_PI, 91)
    deltas = np.linspace(0.03, 3.0, 100)
    region = tradeoff_region(thetas, deltas)

    assert region.phi_favoured.shape == (100, 91)
    expected = thetas[None, :] < region.boundary[:, None]
    far = np.abs(thetas[None, :] - region.boundary[:, None]) > 1e-6
    np.testing.assert_array_equal(region.phi_favoured[far], expected[far])


def test_tradeoff_region_point_and_frame():
    region = tradeoff_region([0.1, 1.4], [0.5])
    assert region.phi_favoured[0, 0]
    assert not region.phi_favoured[0, 1]

    frame = region.to_frame()
    assert list(frame.columns) == ["delta", "theta", "phi_favoured", "boundary_theta"]
    assert len(frame) == 2
