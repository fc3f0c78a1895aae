import numpy as np
import pytest
from scipy import special

from gmcluster.core_processes.green_kernel.half_plane_green import (
    expansion_coefficients,
    fit_expansion_coefficients,
    g0,
    g0_double_prime,
    g0_prime,
    interaction_order,
    interaction_order_from_params,
)
from gmcluster.core_processes.green_kernel.helmholtz_disk_oracle import reflection_consistency_error
from gmcluster.core_processes.green_kernel.modified_bessel import (
    ASYMPTOTIC_CROSSOVER,
    SERIES_CROSSOVER,
    _scaled_hankel_asymptotic,
    _scaled_integral_k0_k1,
    bessel_i0_i1,
    bessel_k0_k1,
)
from gmcluster.system.exceptions import DomainError, PreconditionError

C1_EXPECTED = (np.log(2.0) - np.euler_gamma) / np.pi
C2_EXPECTED = -1.0 / (4.0 * np.pi)

# reference values of K0, K1 to 15 digits
K0_AT_1 = 0.421024438240708
K1_AT_1 = 0.601907230197235
K0_AT_5 = 0.00369109833404259


def test_g0_small_r_logarithmic_behavior():
    r = 1e-4
    assert abs(g0(r) - (-np.log(r) / np.pi + C1_EXPECTED)) < 1e-4


@pytest.mark.parametrize(
    "r, expected_k0",
    [(1.0, K0_AT_1), (5.0, K0_AT_5)],
)
def test_g0_matches_reference_bessel_values(r, expected_k0):
    assert float(g0(r)) == pytest.approx(expected_k0 / np.pi, rel=1e-10)


def test_g0_prime_reference_value():
    assert float(g0_prime(1.0)) == pytest.approx(-K1_AT_1 / np.pi, rel=1e-10)


def test_g0_positive_and_decreasing():
    assert g0(2.0) > g0(3.0) > g0(5.0)
    r = np.logspace(-6, np.log10(50.0), 300)
    values = g0(r)
    assert np.all(values > 0)
    assert np.all(np.diff(values) < 0)
    assert np.all(g0_prime(r) < 0)


def test_g0_prime_matches_finite_difference():
    r, step = 3.0, 1e-5
    finite_difference = (g0(r + step) - g0(r - step)) / (2.0 * step)
    assert abs(g0_prime(r) - finite_difference) < 1e-8


def test_g0_prime_to_g0_ratio_at_large_r():
    ratio = g0_prime(20.0) / g0(20.0)
    assert abs(ratio + 1.0) < 0.03


def test_g0_solves_radial_modified_helmholtz():
    r = np.linspace(0.5, 10.0, 50)
    step = 1e-5
    second_derivative = (g0_prime(r + step) - g0_prime(r - step)) / (2.0 * step)
    assert np.max(np.abs(second_derivative - g0_double_prime(r))) < 1e-8
    residual = second_derivative + g0_prime(r) / r - g0(r)
    assert np.max(np.abs(residual)) < 1e-8


def test_wronskian_identity():
    x = np.linspace(0.1, 10.0, 60)
    k0, k1 = bessel_k0_k1(x)
    i0, i1 = bessel_i0_i1(x)
    assert np.max(np.abs(x * (i0 * k1 + i1 * k0) - 1.0)) < 1e-9



def test_k0_k1_agree_with_scipy_across_all_regimes():
    x = np.concatenate([np.logspace(-6, np.log10(SERIES_CROSSOVER), 40), np.linspace(2.01, 60.0, 120)])
    k0, k1 = bessel_k0_k1(x)
    assert np.allclose(k0, special.k0(x), rtol=1e-11, atol=0), "K0 disagrees with scipy"
    assert np.allclose(k1, special.k1(x), rtol=1e-11, atol=0), "K1 disagrees with scipy"

@pytest.mark.parametrize("crossover", [SERIES_CROSSOVER, ASYMPTOTIC_CROSSOVER])
def test_regime_crossovers_are_seamless(crossover):
    below, above = np.nextafter(crossover, 0.0), np.nextafter(crossover, np.inf)
    k0_below, k1_below = bessel_k0_k1(below)
    k0_above, k1_above = bessel_k0_k1(above)
    assert abs(k0_below - k0_above) < 1e-10 * k0_below
    assert abs(k1_below - k1_above) < 1e-10 * k1_below


def test_expansion_coefficients():
    c1, c2 = expansion_coefficients()
    assert abs(c1 - C1_EXPECTED) < 1e-5
    assert abs(c2 - C2_EXPECTED) < 1e-5
    assert fit_expansion_coefficients().fit_residual < 1e-8


@pytest.mark.parametrize("bad_r", [0.0, -1.0])
def test_g0_rejects_nonpositive_radius(bad_r):
    with pytest.raises(DomainError):
        g0(bad_r)
    with pytest.raises(DomainError):
        g0_prime(bad_r)


def test_reflection_consistency_with_disk_solve():
    assert reflection_consistency_error() < 1e-3


@pytest.mark.parametrize(
    "epsilon, diffusivity",
    [(1e-3, 4e-4), (3e-4, 1e-4), (1e-4, 2.5e-5)],
)
def test_interaction_order_tracks_g0_at_equilibrium_spacing(epsilon, diffusivity):
    """g0 at the leading-order gap agrees with the hop-1 order within a factor (log)^{3/2}."""
    sigma = epsilon / np.sqrt(diffusivity)
    xi_sigma = 0.2
    log_ratio = np.log(xi_sigma / (epsilon * diffusivity))
    spacing = log_ratio / sigma
    order = interaction_order(spacing, sigma, hops=1)
    assert order == pytest.approx(interaction_order_from_params(epsilon, diffusivity, xi_sigma), rel=1e-12)
    assert abs(np.log(g0(sigma * spacing) / order)) <= 1.5 * np.log(log_ratio) + np.log(2.0 * np.pi)


def test_interaction_order_hops_and_decay():
    one_hop = interaction_order(10.0, 1.0, hops=1)
    assert interaction_order(10.0, 1.0, hops=2) == pytest.approx(one_hop**2, rel=1e-12)
    assert interaction_order(1e4, 1.0, hops=1) < 1e-300
    with pytest.raises(PreconditionError):
        interaction_order(10.0, 1.0, hops=0)


@pytest.mark.parametrize("x", [25.0, 30.0, 45.0])
def test_scaled_integral_agrees_with_hankel_expansion(x):
    scaled_k0, scaled_k1 = _scaled_integral_k0_k1(x)
    assert scaled_k0 == pytest.approx(_scaled_hankel_asymptotic(x, 0), rel=1e-12)
    assert scaled_k1 == pytest.approx(_scaled_hankel_asymptotic(x, 1), rel=1e-12)
