import logging
from typing import Sequence

import numpy as np

from gmcluster.core_processes.gm_simulator.run_simulation import SimulationTrajectory
from gmcluster.core_processes.ground_state.ground_state_models import GroundStateMoments
from gmcluster.core_processes.reduced_cluster.cluster_models import ClusterParams
from gmcluster.core_processes.reduced_cluster.reduced_system import reduced_force, solve_positions

logger = logging.getLogger(__name__)


def physical_cluster_params(
    moments: GroundStateMoments, epsilon: float, diffusivity: float, k: int, h_double_prime: float
) -> ClusterParams:
    return ClusterParams.from_moments(moments, epsilon, diffusivity, k, h_double_prime=h_double_prime)


def equilibrium_boundary_gaps(params: ClusterParams) -> np.ndarray:
    """Reduced-system equilibrium gaps in boundary arc length (ε times the rescaled gaps)."""
    return params.epsilon * solve_positions(params).gaps


def predicted_gap_drift_signs(arc_length_offsets: Sequence[float], params: ClusterParams) -> np.ndarray:
    """Signs of d(gap)/dt under the reduced flow ds/dt = -F(s), evaluated at the seeded offsets."""
    rescaled = np.asarray(arc_length_offsets, dtype=float) / params.epsilon
    velocity = -reduced_force(rescaled, params)
    return np.sign(np.diff(velocity))


def observed_gap_drift_signs(trajectory: SimulationTrajectory, windows: int = 3) -> np.ndarray:
    """
    Sign of the gap change over each of `windows` consecutive stretches of the run, shape (windows, k-1).

    A stretch where the spike count changed gives zeros.
    """
    gaps = trajectory.gap_history()
    edges = np.linspace(0, len(gaps) - 1, windows + 1).round().astype(int)
    signs = np.zeros((windows, gaps.shape[1]))
    for window, (start, end) in enumerate(zip(edges[:-1], edges[1:])):
        change = gaps[end] - gaps[start]
        signs[window] = np.where(np.isfinite(change), np.sign(change), 0.0)
    return signs


def drifts_monotonically_toward(values: np.ndarray, target: float = 0.0) -> bool:
    """True when |values - target| never increases along the run and shrinks overall."""
    distance = np.abs(np.asarray(values, dtype=float) - target)
    if distance.size < 2 or not np.all(np.isfinite(distance)):
        return False
    return bool(np.all(np.diff(distance) <= 0) and distance[-1] < distance[0])
