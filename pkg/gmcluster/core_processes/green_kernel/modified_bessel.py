"""
Modified Bessel functions K0, K1 (and I0, I1 for cross-checks), evaluated without a special-function library.

Three regimes are used for K:

* x <= 2: the ascending series with digamma constants,
* 2 < x < 25: the exponentially scaled integral e^x K_n(x) = ∫_0^∞ e^{-x(cosh t - 1)} cosh(n t) dt by the
  trapezoid rule, which converges geometrically for this entire integrand,
* x >= 25: the Hankel asymptotic expansion, truncated once terms drop below machine precision.
"""
import logging
from typing import Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

SERIES_CROSSOVER = 2.0
ASYMPTOTIC_CROSSOVER = 25.0
SERIES_RELATIVE_CUTOFF = 1e-17
MAX_SERIES_TERMS = 200

TRAPEZOID_STEP = 0.05
TRAPEZOID_UPPER_LIMIT = 5.0

ArrayLike = Union[float, np.ndarray]


def _ascending_series_k0_k1(x: float) -> Tuple[float, float]:
    quarter_x_squared = 0.25 * x * x
    log_half_x = np.log(0.5 * x)

    i0 = 0.0
    i1_sum = 0.0
    k0_harmonic_sum = 0.0
    k1_digamma_sum = 0.0
    term_i0 = 1.0  # (x^2/4)^k / (k!)^2
    term_i1 = 1.0  # (x^2/4)^k / (k! (k+1)!)
    harmonic = 0.0  # H_k = psi(k+1) + gamma
    for k in range(MAX_SERIES_TERMS):
        if k > 0:
            harmonic += 1.0 / k
            term_i0 *= quarter_x_squared / (k * k)
            term_i1 *= quarter_x_squared / (k * (k + 1))
        harmonic_next = harmonic + 1.0 / (k + 1)
        i0 += term_i0
        i1_sum += term_i1
        k0_harmonic_sum += harmonic * term_i0
        # psi(k+1) + psi(k+2) = H_k + H_{k+1} - 2 gamma
        k1_digamma_sum += (harmonic + harmonic_next - 2.0 * np.euler_gamma) * term_i1
        if term_i0 < SERIES_RELATIVE_CUTOFF * i0 and k > 0:
            break

    i1 = 0.5 * x * i1_sum
    k0 = -(log_half_x + np.euler_gamma) * i0 + k0_harmonic_sum
    k1 = 1.0 / x + log_half_x * i1 - 0.25 * x * k1_digamma_sum
    return k0, k1


_trapezoid_nodes = np.arange(0.0, TRAPEZOID_UPPER_LIMIT + 0.5 * TRAPEZOID_STEP, TRAPEZOID_STEP)
_trapezoid_weights = np.full(_trapezoid_nodes.size, TRAPEZOID_STEP)
_trapezoid_weights[0] *= 0.5


def _scaled_integral_k0_k1(x: float) -> Tuple[float, float]:
    """e^x K0(x) and e^x K1(x)."""
    kernel = np.exp(-x * (np.cosh(_trapezoid_nodes) - 1.0)) * _trapezoid_weights
    return float(np.sum(kernel)), float(np.sum(kernel * np.cosh(_trapezoid_nodes)))


def _scaled_hankel_asymptotic(x: float, order: int) -> float:
    """e^x K_order(x) from sqrt(pi/2x) Σ_k a_k(order) / x^k."""
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    for k in range(1, MAX_SERIES_TERMS):
        next_term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(next_term) >= abs(term):
            break
        term = next_term
        total += term
        if abs(term) < SERIES_RELATIVE_CUTOFF * abs(total):
            break
    return np.sqrt(np.pi / (2.0 * x)) * total


def _scalar_k0_k1(x: float) -> Tuple[float, float]:
    if x <= SERIES_CROSSOVER:
        return _ascending_series_k0_k1(x)
    if x < ASYMPTOTIC_CROSSOVER:
        scaled_k0, scaled_k1 = _scaled_integral_k0_k1(x)
    else:
        scaled_k0, scaled_k1 = _scaled_hankel_asymptotic(x, 0), _scaled_hankel_asymptotic(x, 1)
    decay = np.exp(-x)
    return scaled_k0 * decay, scaled_k1 * decay


def bessel_k0_k1(x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """K0(x), K1(x) for x > 0, scalar or array."""
    x = np.asarray(x, dtype=float)
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    for index, value in np.ndenumerate(x):
        k0[index], k1[index] = _scalar_k0_k1(float(value))
    return k0, k1


def bessel_i0_i1(x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """I0, I1 by their ascending series; accurate for moderate x (the series has no cancellation)."""
    x = np.asarray(x, dtype=float)
    i0 = np.empty_like(x)
    i1 = np.empty_like(x)
    for index, value in np.ndenumerate(x):
        quarter_x_squared = 0.25 * value * value
        term_i0, term_i1 = 1.0, 1.0
        sum_i0, sum_i1 = 1.0, 1.0
        for k in range(1, MAX_SERIES_TERMS):
            term_i0 *= quarter_x_squared / (k * k)
            term_i1 *= quarter_x_squared / (k * (k + 1))
            sum_i0 += term_i0
            sum_i1 += term_i1
            if term_i0 < SERIES_RELATIVE_CUTOFF * sum_i0 and term_i1 < SERIES_RELATIVE_CUTOFF * sum_i1:
                break
        i0[index] = sum_i0
        i1[index] = 0.5 * value * sum_i1
    return i0, i1
