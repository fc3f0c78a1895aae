import numpy as np
import pytest
from scipy.optimize import brentq

from gmcluster.core_processes.ground_state.ground_state_models import GroundStateMoments
from gmcluster.core_processes.green_kernel.half_plane_green import g0_prime
from gmcluster.core_processes.reduced_cluster import reduced_system
from gmcluster.core_processes.reduced_cluster.cluster_models import ClusterParams
from gmcluster.core_processes.reduced_cluster.reduced_system import (
    asymptotic_spacing,
    reduced_force,
    reduced_jacobian,
    refine_spike_heights,
    solve_positions,
    spike_height_scale,
    validate_admissibility,
)
from gmcluster.core_processes.verify_all.verification_checks import VerificationContext, check_reduced_system
from gmcluster.data_layer.run_config_models import RunConfig
from gmcluster.system.exceptions import ConvergenceError, PreconditionError, RegimeError

REGIME_PARAMETER_SETS = [(1e-3, 4e-4), (3e-4, 1e-4), (1e-4, 2.5e-5)]


def make_params(moments: GroundStateMoments, epsilon: float, diffusivity: float, k: int, curvature_ratio: float):
    """Cluster parameters with -h'' ν1 / (2 ν2) equal to `curvature_ratio`."""
    h_double_prime = -2.0 * moments.nu2 * curvature_ratio / moments.nu1
    return ClusterParams.from_moments(moments, epsilon, diffusivity, k, h_double_prime)


@pytest.mark.usefixtures("ground_state_moments")
def test_spike_height_scale(ground_state_moments: GroundStateMoments):
    diffusivity = 1e-2
    unit_sigma = np.exp(-np.pi / ground_state_moments.I2)
    params = make_params(ground_state_moments, unit_sigma * np.sqrt(diffusivity), diffusivity, 1, 1.0)
    assert spike_height_scale(params) == pytest.approx(1.0, rel=1e-12)

    params = make_params(ground_state_moments, 1e-3 * np.sqrt(diffusivity), diffusivity, 1, 1.0)
    assert spike_height_scale(params) == pytest.approx(np.pi / (np.log(1000.0) * ground_state_moments.I2), rel=1e-12)

    halved = make_params(ground_state_moments, 0.5e-3 * np.sqrt(diffusivity), diffusivity, 1, 1.0)
    assert spike_height_scale(halved) < spike_height_scale(params)


@pytest.mark.usefixtures("ground_state_moments")
def test_spike_height_scale_rejects_sigma_at_least_one(ground_state_moments: GroundStateMoments):
    params = make_params(ground_state_moments, 1.0, 0.25, 1, 1.0)
    with pytest.raises(RegimeError):
        spike_height_scale(params)


@pytest.mark.usefixtures("ground_state_moments")
def test_reduced_force_symmetries(ground_state_moments: GroundStateMoments):
    single = make_params(ground_state_moments, 1e-3, 4e-4, 1, 1.0)
    assert reduced_force(np.array([0.0]), single)[0] == 0.0
    assert reduced_force(np.array([2.0]), single)[0] == pytest.approx(-single.curvature_coefficient * 2.0)

    pair = make_params(ground_state_moments, 1e-3, 4e-4, 2, 1.0)
    pair_force = reduced_force(np.array([-100.0, 100.0]), pair)
    assert pair_force[0] + pair_force[1] == 0.0

    triple = make_params(ground_state_moments, 1e-3, 4e-4, 3, 1.0)
    assert reduced_force(np.array([-150.0, 0.0, 150.0]), triple)[1] == 0.0


@pytest.mark.usefixtures("ground_state_moments")
def test_reduced_force_balance_telescopes(ground_state_moments: GroundStateMoments):
    params = make_params(ground_state_moments, 1e-3, 4e-4, 5, 1.0)
    offsets = np.sort(np.random.default_rng(11).uniform(-400.0, 400.0, size=5))
    force = reduced_force(offsets, params)
    expected = -params.curvature_coefficient * np.sum(offsets)
    term_scale = params.interaction_coefficient * np.max(np.abs(g0_prime(params.sigma * np.diff(offsets))))
    term_scale += abs(params.curvature_coefficient) * np.sum(np.abs(offsets))
    assert abs(np.sum(force) - expected) <= 1e-13 * term_scale


@pytest.mark.usefixtures("ground_state_moments")
def test_reduced_force_rejects_unordered_offsets(ground_state_moments: GroundStateMoments):
    params = make_params(ground_state_moments, 1e-3, 4e-4, 2, 1.0)
    with pytest.raises(PreconditionError):
        reduced_force(np.array([5.0, -5.0]), params)


@pytest.mark.usefixtures("ground_state_moments")
def test_single_spike_sits_at_curvature_maximum(ground_state_moments: GroundStateMoments):
    config = solve_positions(make_params(ground_state_moments, 1e-3, 4e-4, 1, 1.0))
    assert config.offsets.tolist() == [0.0]


@pytest.mark.usefixtures("ground_state_moments")
def test_two_spike_gap_matches_scalar_bisection(ground_state_moments: GroundStateMoments):
    params = make_params(ground_state_moments, 1e-3, 4e-4, 2, 1.0)
    config = solve_positions(params)

    def pair_balance(gap):
        return params.interaction_coefficient * abs(g0_prime(params.sigma * gap)) - abs(
            params.curvature_coefficient
        ) * (gap / 2.0)

    oracle_gap = brentq(pair_balance, 1e-3 / params.sigma, 100.0 / params.sigma, xtol=1e-14, rtol=1e-15)
    assert config.gaps[0] == pytest.approx(oracle_gap, rel=1e-9)
    assert config.offsets[1] == pytest.approx(-config.offsets[0], rel=1e-9)
    assert config.residual_norm < 1e-12 * params.interaction_coefficient


@pytest.mark.usefixtures("ground_state_moments")
def test_three_spike_gaps_are_equal_and_tighter_than_pair(ground_state_moments: GroundStateMoments):
    pair = solve_positions(make_params(ground_state_moments, 1e-3, 4e-4, 2, 1.0))
    triple_params = make_params(ground_state_moments, 1e-3, 4e-4, 3, 1.0)
    triple = solve_positions(triple_params)
    assert triple.gaps[0] == pytest.approx(triple.gaps[1], rel=1e-9)
    scaled_shift = triple_params.sigma * (pair.gaps[0] - triple.gaps[0])
    assert 0 < scaled_shift < np.log(2.0)


@pytest.mark.usefixtures("ground_state_moments")
@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_solution_is_reflection_symmetric(ground_state_moments: GroundStateMoments, k):
    config = solve_positions(make_params(ground_state_moments, 1e-3, 4e-4, k, 1.0))
    extent = config.offsets[-1] - config.offsets[0]
    assert np.max(np.abs(config.offsets + config.offsets[::-1])) < 1e-10 * extent
    assert abs(config.mean_offset) < 1e-10 * extent
    assert np.allclose(config.heights, config.heights[::-1], rtol=1e-9)


@pytest.mark.usefixtures("ground_state", "ground_state_moments")
def test_reduced_system_checks_cover_solved_reflection_symmetry(ground_state, ground_state_moments):
    context = VerificationContext(config=RunConfig(), ground_state=ground_state, moments=ground_state_moments)
    checks = {check.name: check for check in check_reduced_system(context)}

    solved_symmetry = checks["reduced_solution_reflection_antisymmetry"]
    assert solved_symmetry.threshold == 1e-10
    assert solved_symmetry.passed, f"solved offsets break reflection symmetry by {solved_symmetry.measured:.3e}"
    assert checks["reduced_force_reflection_antisymmetry"].passed


@pytest.mark.usefixtures("ground_state_moments")
def test_jacobian_symmetric_and_reduced_flow_stable(ground_state_moments: GroundStateMoments):
    params = make_params(ground_state_moments, 1e-3, 4e-4, 4, 1.0)
    config = solve_positions(params)
    jacobian = reduced_jacobian(config, params)
    assert np.allclose(jacobian, jacobian.T, rtol=0, atol=1e-14 * np.max(np.abs(jacobian)))
    assert np.all(np.linalg.eigvalsh(-jacobian) < 0)


@pytest.mark.usefixtures("ground_state_moments")
def test_asymptotic_spacing_combinatorial_term(ground_state_moments: GroundStateMoments):
    pair = make_params(ground_state_moments, 1e-3, 4e-4, 2, 1.0)
    log_ratio = pair.log_ratio
    assert asymptotic_spacing(2, pair) == pytest.approx((log_ratio - 1.5 * np.log(log_ratio)) / pair.sigma)

    triple = make_params(ground_state_moments, 1e-3, 4e-4, 3, 1.0)
    assert asymptotic_spacing(2, triple) == pytest.approx(asymptotic_spacing(3, triple), rel=1e-15)

    quintet = make_params(ground_state_moments, 1e-3, 4e-4, 5, 1.0)
    gaps = [asymptotic_spacing(i, quintet) for i in range(2, 6)]
    assert quintet.sigma * (gaps[0] - gaps[1]) == pytest.approx(np.log(6.0) - np.log(4.0))
    assert gaps[1] < gaps[0] and gaps[2] < gaps[3]

    with pytest.raises(PreconditionError):
        asymptotic_spacing(1, quintet)


@pytest.mark.usefixtures("ground_state_moments")
def test_asymptotic_spacing_rejects_small_log_ratio(ground_state_moments: GroundStateMoments):
    params = make_params(ground_state_moments, 0.5, 0.9, 2, 1.0)
    with pytest.raises(RegimeError):
        asymptotic_spacing(2, params)


@pytest.mark.usefixtures("ground_state_moments")
@pytest.mark.parametrize("epsilon, diffusivity", REGIME_PARAMETER_SETS)
@pytest.mark.parametrize("k", [2, 3])
def test_solved_positions_are_admissible(ground_state_moments: GroundStateMoments, epsilon, diffusivity, k):
    params = make_params(ground_state_moments, epsilon, diffusivity, k, 5.0)
    config = solve_positions(params)
    report = validate_admissibility(config, params, eta=0.5)
    assert report.passed, f"failed checks: {report.failed_checks()} in {report.checks}"


@pytest.mark.usefixtures("ground_state_moments")
def test_admissibility_detects_constructed_violations(ground_state_moments: GroundStateMoments):
    params = make_params(ground_state_moments, 1e-3, 4e-4, 3, 5.0)
    config = solve_positions(params)
    eta = 0.5

    stretched = config.offsets.copy()
    stretched[2] += config.gaps[1]
    report = validate_admissibility(stretched, params, eta=eta)
    assert report.failed_checks() == ["gap_2_3"]

    translated = config.offsets + 2.0 * eta * params.log_ratio / params.sigma
    report = validate_admissibility(translated, params, eta=eta)
    assert report.failed_checks() == ["mean_offset"]


@pytest.mark.usefixtures("ground_state_moments")
def test_gap_approaches_asymptotic_spacing_as_sigma_decreases(ground_state_moments: GroundStateMoments):
    relative_deviations = []
    for epsilon, diffusivity in REGIME_PARAMETER_SETS:
        params = make_params(ground_state_moments, epsilon, diffusivity, 2, 0.15)
        gap = solve_positions(params).gaps[0]
        relative_deviations.append(abs(gap - asymptotic_spacing(2, params)) / gap)
    assert relative_deviations[0] > relative_deviations[1] > relative_deviations[2], relative_deviations


@pytest.mark.usefixtures("ground_state_moments")
def test_refined_heights_stay_near_height_scale(ground_state_moments: GroundStateMoments):
    params = make_params(ground_state_moments, 1e-3, 4e-4, 3, 1.0)
    config = solve_positions(params)
    assert np.all(np.abs(config.heights / params.xi_sigma - 1.0) < 0.1)
    assert config.heights[0] == pytest.approx(config.heights[2], rel=1e-9)


@pytest.mark.usefixtures("ground_state_moments")
def test_height_solver_errors_become_convergence_errors(ground_state_moments: GroundStateMoments, monkeypatch):
    params = make_params(ground_state_moments, 1e-3, 4e-4, 3, 1.0)
    config = solve_positions(params)

    def broken_root(*args, **kwargs):
        raise ValueError("array must not contain infs or NaNs")

    monkeypatch.setattr(reduced_system, "root", broken_root)
    with pytest.raises(ConvergenceError) as error:
        refine_spike_heights(config, params)
    assert isinstance(error.value.__cause__, ValueError)


@pytest.mark.usefixtures("ground_state_moments")
def test_reduced_drift_opposes_the_force(ground_state_moments: GroundStateMoments):
    params = make_params(ground_state_moments, 1e-3, 4e-4, 2, 1.0)
    equilibrium_gap = solve_positions(params).gaps[0]
    over_spread = np.array([-0.75, 0.75]) * equilibrium_gap
    force = reduced_force(over_spread, params)
    assert force[1] > 0 > force[0], "an over-spread pair should be pulled back with F pointing outward"

    time_step = 1e-3 * equilibrium_gap / np.max(np.abs(force))
    drifted = over_spread - time_step * force
    assert equilibrium_gap < drifted[1] - drifted[0] < over_spread[1] - over_spread[0]
