import logging
from typing import Dict

import numpy as np
from scipy.integrate import simpson
from scipy.special import exp1, gamma, gammaincc

from gmcluster.core_processes.ground_state.ground_state_models import (
    GroundState,
    GroundStateMoments,
    PowerSeries,
    tail_derivative_series,
    tail_value_series,
)
from gmcluster.system.exceptions import AccuracyError

logger = logging.getLogger(__name__)

TAIL_CONVERGED_THRESHOLD = 1e-8


def upper_incomplete_gamma(a: float, x: float) -> float:
    """Γ(a, x) for x > 0 and any real a."""
    if a > 0:
        return float(gammaincc(a, x) * gamma(a))
    if a == 0:
        return float(exp1(x))
    return (upper_incomplete_gamma(a + 1.0, x) - x**a * np.exp(-x)) / a


def multiply_power_series(*factors: PowerSeries) -> PowerSeries:
    product: PowerSeries = {0.0: 1.0}
    for factor in factors:
        next_product: PowerSeries = {}
        for power_left, coefficient_left in product.items():
            for power_right, coefficient_right in factor.items():
                power = power_left + power_right
                next_product[power] = next_product.get(power, 0.0) + coefficient_left * coefficient_right
        product = next_product
    return product


def exponential_tail_integral(series: PowerSeries, decay_rate: float, start: float) -> float:
    """∫_start^∞ e^(-decay_rate r) Σ c_p r^p dr, term by term with incomplete gamma functions."""
    total = 0.0
    for power, coefficient in series.items():
        total += coefficient * decay_rate ** (-(power + 1.0)) * upper_incomplete_gamma(power + 1.0, decay_rate * start)
    return total


def _radial_integral(gs: GroundState, integrand: np.ndarray, tail_series: PowerSeries, decay_rate: float) -> float:
    """Simpson up to the tail-matching radius plus the closed-form tail beyond it."""
    match_index = gs.tail_matching_index
    inner = simpson(integrand[: match_index + 1], x=gs.radius_grid[: match_index + 1])
    return float(inner + exponential_tail_integral(tail_series, decay_rate, gs.tail_matching_radius))


def compute_moments(gs: GroundState) -> GroundStateMoments:
    """
    Half-plane moments of the ground state.

    Half-plane integrals are half of the full-plane radial integrals, so ∫_{R^2_+} f(|y|) dy = π ∫ f(r) r dr.
    ν1 is taken on the axis y2 = 0 where ∂w/∂y1 = w'(|y1|) sign(y1), which gives (2/3) ∫_0^∞ w'^2 r^2 dr.
    """
    if gs.w[-1] > TAIL_CONVERGED_THRESHOLD:
        raise AccuracyError(f"Ground state tail not converged: w(r_max)={gs.w[-1]:.3e} > {TAIL_CONVERGED_THRESHOLD}")

    r = gs.radius_grid
    w, w_prime = gs.w, gs.w_prime
    value_series = tail_value_series(gs.tail_coefficient)
    derivative_series = tail_derivative_series(gs.tail_coefficient)
    r_series = {1.0: 1.0}
    r_squared_series = {2.0: 1.0}

    w2_r = _radial_integral(gs, w**2 * r, multiply_power_series(value_series, value_series, r_series), 2.0)
    w3_r = _radial_integral(
        gs, w**3 * r, multiply_power_series(value_series, value_series, value_series, r_series), 3.0
    )
    w_prime2_r = _radial_integral(
        gs, w_prime**2 * r, multiply_power_series(derivative_series, derivative_series, r_series), 2.0
    )
    w_prime2_r2 = _radial_integral(
        gs, w_prime**2 * r**2, multiply_power_series(derivative_series, derivative_series, r_squared_series), 2.0
    )
    w_w_prime_r2 = _radial_integral(
        gs, w * w_prime * r**2, multiply_power_series(value_series, derivative_series, r_squared_series), 2.0
    )

    i2 = np.pi * w2_r
    i3 = np.pi * w3_r
    igrad = np.pi * w_prime2_r
    moments = GroundStateMoments(
        I2=i2,
        I3=i3,
        Igrad=igrad,
        J1=0.5 * igrad,
        nu1=(2.0 / 3.0) * w_prime2_r2,
        nu2=i3 * i2 / 3.0,
        # ∫_{R^2_+} w ∂w/∂y1 y1 dy, angular average of cos^2 over the half plane is π/2
        M1=0.5 * np.pi * w_w_prime_r2,
    )
    _log_identity_residuals(moments.identity_residuals())
    return moments


def _log_identity_residuals(residuals: Dict[str, float]):
    for name, value in residuals.items():
        logger.debug(f"Moment identity {name}: relative residual {value:.3e}")
    logger.info(f"Ground state moments computed, worst identity residual {max(residuals.values()):.2e}")
