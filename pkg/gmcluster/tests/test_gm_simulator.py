import numpy as np
import pytest

from gmcluster.core_processes.domain_geometry.boundary_curve import BoundaryCurve
from gmcluster.core_processes.gm_simulator.detect_spikes import detect_spikes
from gmcluster.core_processes.gm_simulator.drift_checks import (
    drifts_monotonically_toward,
    equilibrium_boundary_gaps,
    physical_cluster_params,
    predicted_gap_drift_signs,
)
from gmcluster.core_processes.gm_simulator.imex_stepper import ImexStepper, steady_state_residuals
from gmcluster.core_processes.gm_simulator.run_simulation import run_simulation
from gmcluster.core_processes.gm_simulator.sim_grid import build_grid
from gmcluster.core_processes.gm_simulator.sim_state import (
    SimState,
    ansatz_amplitude,
    homogeneous_state,
    seed_boundary_spikes,
)
from gmcluster.core_processes.ground_state.ground_state_models import GroundState, GroundStateMoments
from gmcluster.data_layer.run_config_models import SimulateParametersModel
from gmcluster.system.exceptions import GeometryError, PreconditionError, StepFailureError
from gmcluster.utilities.save_field_snapshot import load_field_snapshot


@pytest.fixture
def unit_disk_grid():
    return build_grid(BoundaryCurve.circle(1.0), 32, 128)


@pytest.fixture
def ellipse_grid():
    return build_grid(BoundaryCurve.ellipse(2.0, 1.0), 24, 96)


def test_laplacian_of_constant_is_zero():
    grid = build_grid(BoundaryCurve.ellipse(2.0, 1.0), 16, 32)
    ones = np.ones(grid.unknowns)
    assert np.max(np.abs(grid.stiffness @ ones)) < 1e-12
    assert np.max(np.abs(grid.apply_laplacian(ones))) < 1e-12


def test_metric_jacobian_is_positive_away_from_pole(ellipse_grid):
    assert np.all(ellipse_grid.metric_jacobian[1:] > 0)
    assert np.all(ellipse_grid.cell_areas > 0)
    assert ellipse_grid.integrate(np.ones(ellipse_grid.unknowns)) == pytest.approx(np.pi * 2.0 * 1.0, rel=1e-3)


def test_laplacian_of_radius_squared_on_unit_disk(unit_disk_grid):
    laplacian = unit_disk_grid.to_field(unit_disk_grid.apply_laplacian(unit_disk_grid.sample(lambda x, y: x**2 + y**2)))
    interior = laplacian[:-1]
    assert np.max(np.abs(interior - 4.0)) < 1e-3, "the boundary ring carries the Neumann condition and is excluded"


def test_boundary_normal_derivative_on_ellipse(ellipse_grid):
    a, b = 2.0, 1.0
    derivative = ellipse_grid.boundary_normal_derivative(ellipse_grid.sample(lambda x, y: x**2 + y**2))
    x, y = (coordinate[-1] for coordinate in ellipse_grid.coordinates)
    expected = 2.0 / np.sqrt(x**2 / a**4 + y**2 / b**4)
    assert np.allclose(derivative, expected, rtol=1e-6, atol=0)


def test_non_star_shaped_curve_is_rejected():
    with pytest.raises(GeometryError):
        build_grid(BoundaryCurve.radial_fourier(1.0, cosine_coefficients=[0.0, 1.5]), 8, 32)
    with pytest.raises(PreconditionError):
        build_grid(BoundaryCurve.circle(1.0), 2, 32)


def test_homogeneous_state_is_a_fixed_point(ellipse_grid):
    state = homogeneous_state(ellipse_grid, epsilon=0.1, diffusivity=0.2)
    stepper = ImexStepper(ellipse_grid)
    for _ in range(50):
        state = stepper.step(state, 0.05)
        assert np.max(np.abs(state.u - 1.0)) < 1e-10
        assert np.max(np.abs(state.v - 1.0)) < 1e-10
    assert state.t == pytest.approx(2.5)


def test_zero_activator_inhibitor_decays_at_rate_one_over_tau(unit_disk_grid):
    tau, dt, v0 = 0.5, 0.01, 3.0
    state = SimState(
        u=np.zeros(unit_disk_grid.unknowns),
        v=np.full(unit_disk_grid.unknowns, v0),
        t=0.0,
        epsilon=0.1,
        diffusivity=0.2,
        tau=tau,
    )
    stepper = ImexStepper(unit_disk_grid)
    for _ in range(50):
        state = stepper.step(state, dt)
    assert np.all(state.u == 0.0)
    assert np.allclose(state.v, v0 * (tau / (tau + dt)) ** 50, rtol=1e-10)
    assert np.allclose(state.v, v0 * np.exp(-state.t / tau), rtol=2e-2)


def test_pure_diffusion_conserves_mass(ellipse_grid):
    rng = np.random.default_rng(7)
    state = SimState(
        u=1.0 + rng.random(ellipse_grid.unknowns),
        v=np.ones(ellipse_grid.unknowns),
        t=0.0,
        epsilon=0.3,
        diffusivity=0.2,
    )
    stepper = ImexStepper(ellipse_grid, include_reaction=False)
    mass = ellipse_grid.integrate(state.u)
    for _ in range(20):
        state = stepper.step(state, 0.1)
        assert abs(ellipse_grid.integrate(state.u) - mass) <= 1e-10 * mass


def test_negative_activator_halves_the_step(unit_disk_grid):
    state = SimState(
        u=np.ones(unit_disk_grid.unknowns),
        v=np.full(unit_disk_grid.unknowns, 1e6),
        t=0.0,
        epsilon=0.1,
        diffusivity=0.2,
    )
    stepper = ImexStepper(unit_disk_grid)
    advanced = stepper.step(state, 4.0)
    assert stepper.last_diagnostics.rejections == 2
    assert advanced.t == pytest.approx(4.0)
    assert advanced.min_u >= 0

    with pytest.raises(StepFailureError) as error:
        ImexStepper(unit_disk_grid, max_halvings=1).step(state, 4.0)
    assert error.value.rejections == 1


def test_temporal_convergence_is_first_order():
    grid = build_grid(BoundaryCurve.circle(1.0), 8, 16)
    initial = SimState(
        u=grid.sample(lambda x, y: 1.0 + 0.5 * x),
        v=grid.sample(lambda x, y: 1.0 + 0.2 * y),
        t=0.0,
        epsilon=0.3,
        diffusivity=0.5,
    )
    finals = []
    for dt in (0.1, 0.05, 0.025):
        stepper = ImexStepper(grid)
        state = initial
        for _ in range(int(round(1.0 / dt))):
            state = stepper.step(state, dt)
        finals.append(state.u)
    coarse_change = np.max(np.abs(finals[0] - finals[1]))
    fine_change = np.max(np.abs(finals[1] - finals[2]))
    assert np.log2(coarse_change / fine_change) >= 0.9


def test_detection_on_flat_field_is_empty(unit_disk_grid):
    detection = detect_spikes(homogeneous_state(unit_disk_grid, 0.1, 0.1), unit_disk_grid, threshold=0.5)
    assert detection.spikes == []
    with pytest.raises(PreconditionError):
        detect_spikes(homogeneous_state(unit_disk_grid, 0.1, 0.1), unit_disk_grid, threshold=1.5)


def test_single_seeded_spike_is_detected_at_its_seed(
    unit_disk_grid, ground_state: GroundState, ground_state_moments: GroundStateMoments
):
    state = seed_boundary_spikes(unit_disk_grid, ground_state, ground_state_moments.I2, 0.1, 0.1, [0.0])
    detection = detect_spikes(state, unit_disk_grid)
    assert len(detection.spikes) == 1
    spike = detection.spikes[0]
    assert spike.is_boundary
    assert np.hypot(spike.position[0] - 1.0, spike.position[1]) < unit_disk_grid.theta_spacing
    assert np.isclose(spike.height, ansatz_amplitude(0.1, 0.1, ground_state_moments.I2) * ground_state.central_value)


def test_three_seeded_spikes_are_ordered_along_the_boundary(
    unit_disk_grid, ground_state: GroundState, ground_state_moments: GroundStateMoments
):
    offsets = [-0.6, 0.0, 0.6]
    state = seed_boundary_spikes(unit_disk_grid, ground_state, ground_state_moments.I2, 0.1, 0.1, offsets)
    detection = detect_spikes(state, unit_disk_grid)
    assert len(detection.boundary_spikes) == 3
    assert np.allclose(detection.arc_lengths, offsets, atol=unit_disk_grid.theta_spacing)
    assert np.all(detection.gaps > 0)


def test_inhibitor_stays_quasi_steady(unit_disk_grid, ground_state: GroundState, ground_state_moments):
    state = seed_boundary_spikes(unit_disk_grid, ground_state, ground_state_moments.I2, 0.1, 0.1, [0.0])
    stepper = ImexStepper(unit_disk_grid)
    for _ in range(20):
        state = stepper.step(state, 0.05)
        _, inhibitor_residual = steady_state_residuals(state, unit_disk_grid)
        assert inhibitor_residual < 1e-8


def test_run_writes_reproducible_snapshots(tmp_path, ground_state: GroundState, ground_state_moments):
    settings = SimulateParametersModel(
        epsilon=0.1, diffusivity=0.1, n_rho=16, n_theta=64, dt=0.05, t_end=1.0, snapshot_every=10
    )
    curve = BoundaryCurve.circle(1.0)
    first = run_simulation(settings, curve, ground_state, ground_state_moments.I2, tmp_path / "a", use_tqdm=False)
    run_simulation(settings, curve, ground_state, ground_state_moments.I2, tmp_path / "b", use_tqdm=False)

    assert [snapshot.step for snapshot in first.snapshots] == [0, 10, 20]
    snapshot_files = sorted(path.name for path in (tmp_path / "a" / "field_snapshots").iterdir())
    assert "field_snapshot_00002.bin" in snapshot_files and "field_snapshot_00002.hdr" in snapshot_files
    for name in snapshot_files:
        assert (tmp_path / "a" / "field_snapshots" / name).read_bytes() == (
            tmp_path / "b" / "field_snapshots" / name
        ).read_bytes()

    u_field, v_field, header = load_field_snapshot(tmp_path / "a" / "field_snapshots" / "field_snapshot_00002.bin")
    assert u_field.shape == (17, 64)
    assert np.allclose(first.grid.to_vector(u_field), first.final_state.u)
    assert float(header["time"]) == pytest.approx(1.0)

    tracks = first.tracks_dataframe()
    assert list(tracks.columns[:4]) == ["t", "spike_index", "arc_length", "height"]
    summary = first.summary()
    assert summary["final_boundary_spikes"] == 1
    assert "asymptotic regime" in summary["note"]


@pytest.mark.slow
def test_single_boundary_spike_persists_on_unit_disk(ground_state: GroundState, ground_state_moments):
    settings = SimulateParametersModel(
        epsilon=0.1, diffusivity=0.1, n_rho=24, n_theta=96, dt=0.05, t_end=10.0, snapshot_every=50, write_fields=False
    )
    trajectory = run_simulation(settings, BoundaryCurve.circle(1.0), ground_state, ground_state_moments.I2, use_tqdm=False)
    assert all(len(snapshot.detection.boundary_spikes) == 1 for snapshot in trajectory.snapshots)
    assert all(not snapshot.detection.interior_spikes for snapshot in trajectory.snapshots)
    relative_height = trajectory.heights()[-1] / trajectory.amplitude_scale
    assert 0.25 < relative_height < 4.0
    assert min(snapshot.min_u for snapshot in trajectory.snapshots) >= -1e-8 * trajectory.heights()[0]


def test_reduced_flow_drift_signs(ground_state_moments: GroundStateMoments):
    params = physical_cluster_params(ground_state_moments, 0.05, 0.1, 2, h_double_prime=-3.0)
    equilibrium = equilibrium_boundary_gaps(params)[0]
    over_spread = [-0.75 * equilibrium, 0.75 * equilibrium]
    under_spread = [-0.25 * equilibrium, 0.25 * equilibrium]
    assert predicted_gap_drift_signs(over_spread, params).tolist() == [-1.0]
    assert predicted_gap_drift_signs(under_spread, params).tolist() == [1.0]


def test_monotone_drift_helper():
    assert drifts_monotonically_toward(np.array([0.5, 0.3, 0.3, 0.1]))
    assert not drifts_monotonically_toward(np.array([0.5, 0.6, 0.1]))
    assert not drifts_monotonically_toward(np.array([-0.2, -0.2]))
