import dataclasses

import numpy as np
import pytest
from scipy.integrate import quad

from gmcluster.core_processes.ground_state.compute_moments import compute_moments, upper_incomplete_gamma
from gmcluster.core_processes.ground_state.ground_state_models import GroundState, GroundStateMoments
from gmcluster.core_processes.ground_state.solve_ground_state import solve_ground_state
from gmcluster.system.exceptions import AccuracyError, PreconditionError, ValidationError


@pytest.mark.usefixtures("ground_state")
def test_ground_state_profile_shape(ground_state: GroundState):
    """
    the shooting solve should give a positive, strictly decreasing profile with a regular origin and a converged tail
    """
    assert ground_state.central_value == pytest.approx(2.3919, abs=2e-3), f"w(0)={ground_state.central_value}"
    assert ground_state.w_prime[0] == 0.0, "w'(0) should be exactly zero at the regular origin"
    assert np.all(np.diff(ground_state.w) < 0), "w should be strictly decreasing"
    assert ground_state.w[-1] < 1e-10, f"w(r_max)={ground_state.w[-1]:.3e} is not below 1e-10"


@pytest.mark.usefixtures("ground_state")
def test_ground_state_decay_rates(ground_state: GroundState):
    tail_ratio = ground_state.w_prime[-1] / ground_state.w[-1]
    assert abs(tail_ratio + 1.0) < 0.02, f"w'/w at r_max is {tail_ratio}, expected -1 within 2%"

    ratio = float(ground_state.value_at(10.0) / ground_state.value_at(5.0))
    expected = np.sqrt(5.0 / 10.0) * np.exp(-5.0)
    assert ratio == pytest.approx(expected, rel=0.05)


@pytest.mark.usefixtures("ground_state")
def test_ground_state_ode_residual(ground_state: GroundState):
    residual = ground_state.max_ode_residual()
    assert residual < 1e-6 * np.max(ground_state.w), f"stencil residual {residual:.3e} too large"


@pytest.mark.usefixtures("ground_state_moments")
def test_moment_identities(ground_state_moments: GroundStateMoments):
    moments = ground_state_moments
    assert moments.nu2 == pytest.approx(moments.I3 * moments.I2 / 3.0, rel=1e-15)
    assert moments.J1 == pytest.approx(0.5 * moments.Igrad, rel=1e-15)
    for name, residual in moments.identity_residuals().items():
        assert residual < 1e-4, f"identity {name} violated: relative residual {residual:.3e}"
    for name, value in moments.dict().items():
        if name != "M1":
            assert value > 0, f"moment {name}={value} should be positive"


@pytest.mark.usefixtures("ground_state_moments")
def test_moments_insensitive_to_doubling_r_max(ground_state_moments: GroundStateMoments):
    long_ground_state = solve_ground_state(r_max=50.0, grid_n=16000, tol=1e-12)
    long_moments = compute_moments(long_ground_state)
    for name, value in ground_state_moments.dict().items():
        long_value = getattr(long_moments, name)
        assert abs(long_value - value) < 1e-6 * abs(value), f"{name}: {value} vs {long_value} after doubling r_max"


def test_central_value_converges_at_second_order():
    central_values = [solve_ground_state(r_max=25.0, grid_n=n, tol=1e-12).central_value for n in (2000, 4000, 8000)]
    coarse_change = central_values[0] - central_values[1]
    fine_change = central_values[1] - central_values[2]
    observed_order = np.log2(abs(coarse_change / fine_change))
    assert 1.8 <= observed_order <= 2.2, f"observed order {observed_order:.3f} from {central_values}"


@pytest.mark.parametrize("grid_n", [2000, 4000, 8000])
def test_residual_stays_small_under_grid_refinement(grid_n: int):
    """
    refining the grid must not trip the accuracy check: the seam stencils are left out, the seam is judged by slope
    """
    ground_state = solve_ground_state(r_max=25.0, grid_n=grid_n, tol=1e-12)
    residual = ground_state.ode_residual()
    seam = [ground_state.tail_matching_index - 1, ground_state.tail_matching_index]

    assert np.all(np.isnan(residual[seam]))
    assert np.count_nonzero(np.isnan(residual)) == 2
    assert ground_state.max_ode_residual() < 1e-6 * ground_state.central_value
    assert np.all(np.isfinite(ground_state.ode_residual(include_seam=True)))
    assert ground_state.seam_slope_mismatch() < 1e-2, f"seam slope mismatch {ground_state.seam_slope_mismatch():.3e}"


@pytest.mark.parametrize(
    "kwargs",
    [
        {"r_max": 15.0, "grid_n": 4000, "tol": 1e-12},
        {"r_max": 25.0, "grid_n": 1000, "tol": 1e-12},
        {"r_max": 25.0, "grid_n": 4000, "tol": 1e-6},
    ],
)
def test_solve_ground_state_rejects_bad_parameters(kwargs):
    with pytest.raises(PreconditionError):
        solve_ground_state(**kwargs)
    assert issubclass(PreconditionError, ValidationError)


@pytest.mark.usefixtures("ground_state")
def test_compute_moments_rejects_unconverged_tail(ground_state: GroundState):
    w = ground_state.w.copy()
    w[-1] = 1e-6
    with pytest.raises(AccuracyError):
        compute_moments(dataclasses.replace(ground_state, w=w))


@pytest.mark.parametrize("a", [2.5, 1.0, 0.0, -0.5, -1.0, -2.5])
def test_upper_incomplete_gamma_matches_quadrature(a):
    x = 3.0
    expected, _ = quad(lambda t: t ** (a - 1.0) * np.exp(-t), x, np.inf, epsabs=0, epsrel=1e-13)
    assert upper_incomplete_gamma(a, x) == pytest.approx(expected, rel=1e-10)


@pytest.mark.usefixtures("ground_state")
def test_profile_csv_columns(ground_state: GroundState):
    dataframe = ground_state.to_dataframe()
    assert list(dataframe.columns) == ["r", "w", "w_prime"]
    assert len(dataframe) == ground_state.grid_n + 1
