import logging
from typing import Optional, Union

import numpy as np
from scipy.linalg import LinAlgError
from scipy.optimize import root

from gmcluster.core_processes.green_kernel.half_plane_green import g0, g0_double_prime, g0_prime
from gmcluster.core_processes.reduced_cluster.cluster_models import (
    AdmissibilityCheck,
    AdmissibilityReport,
    ClusterParams,
    SpikeConfiguration,
)
from gmcluster.system.exceptions import (
    ConvergenceError,
    DivergenceError,
    PreconditionError,
    RegimeError,
    SingularInteractionError,
    SingularJacobianError,
)

logger = logging.getLogger(__name__)

MAX_NEWTON_ITERATIONS = 100
RESIDUAL_RELATIVE_TOLERANCE = 1e-12
ARMIJO_SUFFICIENT_DECREASE = 1e-4
ARMIJO_BACKTRACK_FACTOR = 0.5
MAX_BACKTRACKS = 40
SINGULAR_CONDITION_NUMBER = 1e14
COINCIDENT_GAP_FACTOR = 1e-12

OffsetsLike = Union[SpikeConfiguration, np.ndarray]


def _as_offsets(config: OffsetsLike) -> np.ndarray:
    if isinstance(config, SpikeConfiguration):
        return config.offsets
    return np.asarray(config, dtype=float)


def spike_height_scale(params: ClusterParams) -> float:
    return params.xi_sigma


def _scaled_gaps(offsets: np.ndarray, params: ClusterParams) -> np.ndarray:
    gaps = np.diff(offsets)
    if np.any(gaps <= 0):
        raise PreconditionError(f"Spike offsets must be strictly increasing, got {offsets}")
    if np.any(gaps < COINCIDENT_GAP_FACTOR / params.sigma):
        raise SingularInteractionError(f"Coincident spikes: smallest gap {np.min(gaps):.3e}")
    return params.sigma * gaps


def reduced_force(config: OffsetsLike, params: ClusterParams) -> np.ndarray:
    """
    Left-hand sides of the limiting position system.

    F_i = ν2 ξσ σ (G0'(σ|s_{i-1} - s_i|) - G0'(σ|s_i - s_{i+1}|)) - ν1 ε³ h'' s_i, with the missing neighbor
    terms dropped for the two end spikes.

    The reduced drift is ds/dt = -F(s), so a positive F_i moves spike i toward negative arc length.
    """
    offsets = _as_offsets(config)
    force = -params.curvature_coefficient * offsets
    if offsets.size == 1:
        return force
    neighbor_pull = params.interaction_coefficient * g0_prime(_scaled_gaps(offsets, params))
    force[1:] += neighbor_pull
    force[:-1] -= neighbor_pull
    return force


def reduced_jacobian(config: OffsetsLike, params: ClusterParams) -> np.ndarray:
    """Tridiagonal ∂F_i/∂s_j, symmetric."""
    offsets = _as_offsets(config)
    jacobian = np.diag(np.full(offsets.size, -params.curvature_coefficient))
    if offsets.size == 1:
        return jacobian
    coupling = params.interaction_coefficient * params.sigma * g0_double_prime(_scaled_gaps(offsets, params))
    for gap_index, value in enumerate(coupling):
        left, right = gap_index, gap_index + 1
        jacobian[left, left] += value
        jacobian[right, right] += value
        jacobian[left, right] -= value
        jacobian[right, left] -= value
    return jacobian


def asymptotic_spacing(i: int, params: ClusterParams) -> float:
    """
    Leading-order gap between spikes i-1 and i (1-based, 2 <= i <= k):
    σ⁻¹ [L - (3/2) log L - log(-h'' ν1 / (2 ν2)) - log((i-1)(k+1-i))]
    """
    if not 2 <= i <= params.k:
        raise PreconditionError(f"Gap index must satisfy 2 <= i <= k={params.k}, got {i}")
    log_ratio = params.log_ratio
    if log_ratio <= 1:
        raise RegimeError(f"log(ξσ/(εD))={log_ratio:.4f} <= 1")
    curvature_term = np.log(-params.h_double_prime * params.nu1 / (2.0 * params.nu2))
    combinatorial_term = np.log((i - 1) * (params.k + 1 - i))
    return float((log_ratio - 1.5 * np.log(log_ratio) - curvature_term - combinatorial_term) / params.sigma)


def asymptotic_seed(params: ClusterParams) -> np.ndarray:
    if params.k == 1:
        return np.zeros(1)
    gaps = np.array([asymptotic_spacing(i, params) for i in range(2, params.k + 1)])
    if np.any(gaps <= 0):
        raise RegimeError(f"Asymptotic gaps are not positive: {gaps}")
    offsets = np.concatenate([[0.0], np.cumsum(gaps)])
    return offsets - offsets.mean()


def _residual_tolerance(offsets: np.ndarray, params: ClusterParams) -> float:
    """1e-12 of the smaller of ν2 ξσ σ and the size of the individual force terms."""
    force_scale = abs(params.curvature_coefficient) * np.max(np.abs(offsets))
    if offsets.size > 1:
        force_scale += params.interaction_coefficient * np.max(np.abs(g0_prime(_scaled_gaps(offsets, params))))
    if force_scale == 0:
        force_scale = params.interaction_coefficient
    return RESIDUAL_RELATIVE_TOLERANCE * min(params.interaction_coefficient, force_scale)


def solve_positions(params: ClusterParams, initial: Optional[SpikeConfiguration] = None) -> SpikeConfiguration:
    """
    Damped Newton solve of F(s) = 0 with Armijo backtracking (factor 0.5).

    Trial steps that reorder the spikes count as failed backtracks.
    """
    warnings = params.regime_warnings()
    offsets = asymptotic_seed(params) if initial is None else _as_offsets(initial).copy()
    if offsets.size != params.k:
        raise PreconditionError(f"Initial configuration has {offsets.size} spikes, expected k={params.k}")
    if params.k == 1:
        return SpikeConfiguration(
            offsets=np.zeros(1),
            heights=np.array([params.xi_sigma]),
            residual_norm=0.0,
            warnings=warnings,
        )

    force = reduced_force(offsets, params)
    residual_norm = float(np.max(np.abs(force)))
    newton_steps = 0
    for iteration in range(1, MAX_NEWTON_ITERATIONS + 1):
        if residual_norm < _residual_tolerance(offsets, params):
            break
        newton_steps = iteration
        jacobian = reduced_jacobian(offsets, params)
        condition_estimate = float(np.linalg.cond(jacobian))
        if not np.isfinite(condition_estimate) or condition_estimate > SINGULAR_CONDITION_NUMBER:
            raise SingularJacobianError(
                f"Reduced Jacobian is singular (condition {condition_estimate:.3e})", condition_estimate
            )
        step = np.linalg.solve(jacobian, -force)

        step_length = 1.0
        merit = np.linalg.norm(force)
        for _ in range(MAX_BACKTRACKS):
            trial = offsets + step_length * step
            if np.all(np.diff(trial) > 0):
                trial_force = reduced_force(trial, params)
                if np.linalg.norm(trial_force) <= (1.0 - ARMIJO_SUFFICIENT_DECREASE * step_length) * merit:
                    break
            step_length *= ARMIJO_BACKTRACK_FACTOR
        else:
            raise DivergenceError(
                f"Line search failed at Newton iteration {iteration}", last_iterate=offsets, residual_norm=residual_norm
            )

        offsets, force = trial, trial_force
        residual_norm = float(np.max(np.abs(force)))
        logger.trace(f"Newton iteration {iteration}: step length {step_length:.3g}, |F|_inf={residual_norm:.3e}")
    else:
        if residual_norm >= _residual_tolerance(offsets, params):
            raise DivergenceError(
                f"Newton did not converge in {MAX_NEWTON_ITERATIONS} iterations, |F|_inf={residual_norm:.3e}",
                last_iterate=offsets,
                residual_norm=residual_norm,
            )

    config = SpikeConfiguration(
        offsets=offsets,
        residual_norm=residual_norm,
        iterations=newton_steps,
        warnings=warnings,
    )
    config.heights = refine_spike_heights(config, params)
    logger.info(
        f"Solved k={params.k} cluster in {newton_steps} Newton iterations: gaps {np.round(config.gaps, 6).tolist()}, "
        f"|F|_inf={residual_norm:.3e}"
    )
    return config


def refine_spike_heights(config: OffsetsLike, params: ClusterParams) -> np.ndarray:
    """
    Heights from ξ_i = (π⁻¹ log(1/σ) I2) ξ_i² + I2 Σ_{j≠i} ξ_j² G0(σ|s_i - s_j|), seeded at ξσ.
    """
    offsets = _as_offsets(config)
    xi_sigma = params.xi_sigma
    if offsets.size == 1:
        return np.array([xi_sigma])
    self_coefficient = 1.0 / xi_sigma
    distances = params.sigma * np.abs(offsets[:, None] - offsets[None, :])
    np.fill_diagonal(distances, 1.0)
    coupling = params.I2 * g0(distances)
    np.fill_diagonal(coupling, 0.0)

    def height_balance(heights: np.ndarray) -> np.ndarray:
        return heights - self_coefficient * heights**2 - coupling @ heights**2

    try:
        solution = root(height_balance, x0=np.full(offsets.size, xi_sigma), method="hybr")
    except (ValueError, LinAlgError) as error:
        raise ConvergenceError(f"Spike height balance failed inside the root finder: {error}") from error
    if not solution.success:
        raise ConvergenceError(f"Spike height balance did not converge: {solution.message}")
    return solution.x


def validate_admissibility(config: OffsetsLike, params: ClusterParams, eta: float = 0.5) -> AdmissibilityReport:
    """
    Each neighbor gap (in √D units) against its asymptotic window with slack η, and the mean offset against
    η σ⁻¹ log(ξσ/(εD)).
    """
    offsets = _as_offsets(config)
    checks = []
    for i in range(2, offsets.size + 1):
        deviation = params.sigma * ((offsets[i - 1] - offsets[i - 2]) - asymptotic_spacing(i, params))
        checks.append(
            AdmissibilityCheck(
                name=f"gap_{i - 1}_{i}",
                passed=abs(deviation) <= eta,
                deviation=deviation,
                bound=eta,
                margin=eta - abs(deviation),
            )
        )
    mean_offset = float(np.mean(offsets))
    mean_bound = eta * params.log_ratio / params.sigma
    checks.append(
        AdmissibilityCheck(
            name="mean_offset",
            passed=abs(mean_offset) <= mean_bound,
            deviation=mean_offset,
            bound=mean_bound,
            margin=mean_bound - abs(mean_offset),
        )
    )
    report = AdmissibilityReport(eta=eta, checks=checks)
    if not report.passed:
        logger.warning(f"Admissibility checks failed: {report.failed_checks()}")
    return report
