import logging
from enum import Enum
from typing import Tuple

import numpy as np

from gmcluster.core_processes.ground_state.ground_state_models import (
    GroundState,
    evaluate_power_series,
    tail_value_series,
)
from gmcluster.system.exceptions import AccuracyError, ConvergenceError, PreconditionError, ShootingBracketError

logger = logging.getLogger(__name__)

SHOOTING_BRACKET = (1.0, 4.0)
MAX_BISECTION_ITERATIONS = 200
MIN_R_MAX = 20.0
MIN_GRID_N = 2000
MAX_TOLERANCE = 1e-10
TAIL_MATCH_RELATIVE_AGREEMENT = 1e-6
MIN_TAIL_MATCHING_RADIUS = 8.0
RESIDUAL_RELATIVE_TOLERANCE = 1e-6


class TrajectoryEvent(str, Enum):
    CROSSED_ZERO = "crossed_zero"  # w(0) too large
    TURNED_UPWARD = "turned_upward"  # w(0) too small
    NONE = "none"


def march_trajectory(central_value: float, grid_spacing: float, grid_n: int) -> Tuple[np.ndarray, TrajectoryEvent, int]:
    """
    March the second-order radial stencil outward from w(0) = `central_value`.

    Stops at the first zero crossing or upward turn and returns the filled prefix of the
    trajectory, the event and the index where it happened.
    """
    h_squared = grid_spacing**2
    w = np.empty(grid_n + 1)
    w[0] = central_value
    # regular origin, Δw(0) = 4 (w_1 - w_0) / h^2
    w[1] = central_value + 0.25 * h_squared * (central_value - central_value**2)
    if w[1] > w[0]:
        return w[:2], TrajectoryEvent.TURNED_UPWARD, 1

    for j in range(1, grid_n):
        half_over_j = 0.5 / j
        w[j + 1] = (2.0 * w[j] - w[j - 1] * (1.0 - half_over_j) + h_squared * (w[j] - w[j] ** 2)) / (1.0 + half_over_j)
        if w[j + 1] < 0:
            return w[: j + 2], TrajectoryEvent.CROSSED_ZERO, j + 1
        if w[j + 1] > w[j]:
            return w[: j + 2], TrajectoryEvent.TURNED_UPWARD, j + 1
    return w, TrajectoryEvent.NONE, grid_n


def _overshoots(central_value: float, grid_spacing: float, grid_n: int) -> bool:
    _, event, _ = march_trajectory(central_value, grid_spacing, grid_n)
    return event is TrajectoryEvent.CROSSED_ZERO


def _find_tail_matching_index(w_low: np.ndarray, w_high: np.ndarray) -> int:
    """Last index up to which the bracketing trajectories agree and decrease."""
    shared = min(w_low.size, w_high.size) - 1
    w_mid = 0.5 * (w_low[:shared] + w_high[:shared])
    disagreement = np.abs(w_high[:shared] - w_low[:shared]) > TAIL_MATCH_RELATIVE_AGREEMENT * np.abs(w_mid)
    not_decreasing = np.append(False, np.diff(w_mid) >= 0)
    bad = np.flatnonzero(disagreement | not_decreasing)
    first_bad = int(bad[0]) if bad.size else shared
    return first_bad - 1


def solve_ground_state(r_max: float = 25.0, grid_n: int = 4000, tol: float = 1e-12) -> GroundState:
    """
    Radial ground state of Δw - w + w^2 = 0 in R^2 by shooting on w(0).

    The central value is bisected on [1, 4] down to machine precision, classifying each discrete
    trajectory by whether it first crosses zero or first turns upward. The profile is kept from the
    origin out to the radius where the two bracketing trajectories still agree, and continued by the
    exponential tail C r^(-1/2) e^(-r) (1 - 1/(8r) + ...) matched there.
    """
    if r_max < MIN_R_MAX:
        raise PreconditionError(f"r_max must be >= {MIN_R_MAX}, got {r_max}")
    if grid_n < MIN_GRID_N:
        raise PreconditionError(f"grid_n must be >= {MIN_GRID_N}, got {grid_n}")
    if not 0 < tol <= MAX_TOLERANCE:
        raise PreconditionError(f"tol must be in (0, {MAX_TOLERANCE}], got {tol}")

    grid_spacing = r_max / grid_n
    radius_grid = grid_spacing * np.arange(grid_n + 1)

    low, high = SHOOTING_BRACKET
    if _overshoots(low, grid_spacing, grid_n) or not _overshoots(high, grid_spacing, grid_n):
        raise ShootingBracketError(f"Initial bracket w(0) in [{low}, {high}] does not straddle the ground state")

    iterations = 0
    while iterations < MAX_BISECTION_ITERATIONS:
        mid = 0.5 * (low + high)
        if mid in (low, high):
            break
        iterations += 1
        if _overshoots(mid, grid_spacing, grid_n):
            high = mid
        else:
            low = mid
    if high - low > tol:
        raise ConvergenceError(
            f"Shooting bisection stopped after {iterations} iterations with bracket width {high - low:.3e} > {tol:.1e}"
        )
    logger.debug(f"Shooting converged after {iterations} bisections, w(0) in [{low!r}, {high!r}]")

    w_low, _, _ = march_trajectory(low, grid_spacing, grid_n)
    w_high, _, _ = march_trajectory(high, grid_spacing, grid_n)
    match_index = _find_tail_matching_index(w_low, w_high)
    tail_matching_radius = float(radius_grid[match_index])
    if tail_matching_radius < MIN_TAIL_MATCHING_RADIUS:
        raise ConvergenceError(
            f"Bracketing trajectories separate at r={tail_matching_radius:.3f} < {MIN_TAIL_MATCHING_RADIUS}, "
            f"the tail cannot be matched"
        )

    w = np.empty(grid_n + 1)
    w[: match_index + 1] = 0.5 * (w_low[: match_index + 1] + w_high[: match_index + 1])
    tail_coefficient = float(
        w[match_index]
        / (np.exp(-tail_matching_radius) * evaluate_power_series(tail_value_series(1.0), tail_matching_radius))
    )

    ground_state_prefix = GroundState(
        radius_grid=radius_grid,
        w=w,
        w_prime=np.zeros_like(w),
        central_value=float(w[0]),
        grid_spacing=grid_spacing,
        tail_matching_radius=tail_matching_radius,
        tail_matching_index=match_index,
        tail_coefficient=tail_coefficient,
        shooting_iterations=iterations,
    )
    w[match_index + 1 :] = ground_state_prefix.tail_value(radius_grid[match_index + 1 :])

    w_prime = np.zeros_like(w)
    w_prime[1:match_index] = (w[2 : match_index + 1] - w[: match_index - 1]) / (2.0 * grid_spacing)
    w_prime[match_index:] = ground_state_prefix.tail_derivative(radius_grid[match_index:])

    ground_state = GroundState(
        radius_grid=radius_grid,
        w=w,
        w_prime=w_prime,
        central_value=float(w[0]),
        grid_spacing=grid_spacing,
        tail_matching_radius=tail_matching_radius,
        tail_matching_index=match_index,
        tail_coefficient=tail_coefficient,
        shooting_iterations=iterations,
    )

    residual = ground_state.max_ode_residual()
    if residual > RESIDUAL_RELATIVE_TOLERANCE * w[0]:
        raise AccuracyError(f"Ground state stencil residual {residual:.3e} exceeds {RESIDUAL_RELATIVE_TOLERANCE} max w")

    logger.info(
        f"Ground state solved: w(0)={ground_state.central_value:.12f}, tail matched at r={tail_matching_radius:.3f} "
        f"with C={tail_coefficient:.8f}, residual {residual:.2e}"
    )
    return ground_state
