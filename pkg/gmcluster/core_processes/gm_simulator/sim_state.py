import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from gmcluster.core_processes.domain_geometry.curvature_maxima import find_curvature_maxima
from gmcluster.core_processes.gm_simulator.sim_grid import SimGrid
from gmcluster.core_processes.ground_state.ground_state_models import GroundState
from gmcluster.core_processes.reduced_cluster.cluster_models import height_scale
from gmcluster.system.exceptions import PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimState:
    """Activator u and inhibitor v at every grid unknown at time t."""

    u: np.ndarray
    v: np.ndarray
    t: float
    epsilon: float
    diffusivity: float
    tau: float = 0.0

    def __post_init__(self):
        if self.epsilon <= 0 or self.diffusivity <= 0 or self.tau < 0:
            raise PreconditionError(f"Bad parameters ε={self.epsilon}, D={self.diffusivity}, τ={self.tau}")
        if self.u.shape != self.v.shape:
            raise PreconditionError(f"u and v shapes differ: {self.u.shape} vs {self.v.shape}")

    def advanced(self, u: np.ndarray, v: np.ndarray, dt: float) -> "SimState":
        return replace(self, u=u, v=v, t=self.t + dt)

    @property
    def max_u(self) -> float:
        return float(np.max(self.u))

    @property
    def min_u(self) -> float:
        return float(np.min(self.u))


def ansatz_amplitude(epsilon: float, diffusivity: float, i2: float) -> float:
    """D ξσ / ε², the activator height scale of a boundary spike."""
    return diffusivity * height_scale(epsilon / np.sqrt(diffusivity), i2) / epsilon**2


def default_reference_parameter(grid: SimGrid) -> float:
    """Curve parameter of the first curvature maximum, or 0 on constant-curvature curves."""
    search = find_curvature_maxima(grid.curve)
    return search[0].parameter if len(search) > 0 else 0.0


def quasi_steady_inhibitor(grid: SimGrid, u: np.ndarray, diffusivity: float) -> np.ndarray:
    """Discrete solution of DΔv - v + u² = 0 with Neumann conditions."""
    operator = (sparse.diags(grid.cell_areas) - diffusivity * grid.stiffness).tocsc()
    return splu(operator).solve(grid.cell_areas * u**2)


def homogeneous_state(grid: SimGrid, epsilon: float, diffusivity: float, tau: float = 0.0, value: float = 1.0):
    return SimState(
        u=np.full(grid.unknowns, value),
        v=np.full(grid.unknowns, value),
        t=0.0,
        epsilon=epsilon,
        diffusivity=diffusivity,
        tau=tau,
    )


def boundary_spike_centers(
    grid: SimGrid, arc_length_offsets: Sequence[float], reference_parameter: Optional[float] = None
) -> np.ndarray:
    """Boundary points at the given arc-length offsets from the reference parameter, shape (k, 2)."""
    if reference_parameter is None:
        reference_parameter = default_reference_parameter(grid)
    curve = grid.curve
    return np.array(
        [curve.position(curve.parameter_at_arc_length(reference_parameter, float(offset))) for offset in arc_length_offsets]
    )


def seed_boundary_spikes(
    grid: SimGrid,
    ground_state: GroundState,
    i2: float,
    epsilon: float,
    diffusivity: float,
    arc_length_offsets: Sequence[float],
    tau: float = 0.0,
    reference_parameter: Optional[float] = None,
) -> SimState:
    """
    u = Σ (D ξσ/ε²) w(|x - P_i| / ε) with P_i on the boundary, v from the quasi-steady inhibitor solve.
    """
    if len(arc_length_offsets) == 0:
        raise PreconditionError("Seeding needs at least one spike offset")
    centers = boundary_spike_centers(grid, arc_length_offsets, reference_parameter)
    amplitude = ansatz_amplitude(epsilon, diffusivity, i2)

    x, y = grid.coordinates
    u_field = np.zeros(grid.shape)
    for center in centers:
        distance = np.hypot(x - center[0], y - center[1])
        u_field += amplitude * ground_state.value_at(distance / epsilon)
    u = grid.to_vector(u_field)
    v = quasi_steady_inhibitor(grid, u, diffusivity)

    logger.info(
        f"Seeded {len(centers)} boundary spike(s) with amplitude D ξσ/ε² = {amplitude:.4g} "
        f"(ε={epsilon}, D={diffusivity}, τ={tau})"
    )
    return SimState(u=u, v=v, t=0.0, epsilon=epsilon, diffusivity=diffusivity, tau=tau)
