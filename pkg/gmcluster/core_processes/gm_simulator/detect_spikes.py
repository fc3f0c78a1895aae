import logging
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from gmcluster.core_processes.domain_geometry.boundary_curve import TWO_PI
from gmcluster.core_processes.gm_simulator.sim_grid import SimGrid
from gmcluster.core_processes.gm_simulator.sim_state import SimState, default_reference_parameter
from gmcluster.system.exceptions import PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_DETECTION_THRESHOLD = 0.2
BOUNDARY_DISTANCE_IN_EPSILON = 2.0


class DetectedSpike(BaseModel):
    position: Tuple[float, float]
    height: float
    rho: float
    theta: float
    boundary_distance: float
    arc_length: Optional[float] = Field(None, description="Signed boundary arc length from the reference point")

    @property
    def is_boundary(self) -> bool:
        return self.arc_length is not None


class SpikeDetection(BaseModel):
    threshold: float
    reference_parameter: float
    spikes: List[DetectedSpike] = Field(default_factory=list)

    @property
    def boundary_spikes(self) -> List[DetectedSpike]:
        return sorted((spike for spike in self.spikes if spike.is_boundary), key=lambda spike: spike.arc_length)

    @property
    def interior_spikes(self) -> List[DetectedSpike]:
        return [spike for spike in self.spikes if not spike.is_boundary]

    @property
    def arc_lengths(self) -> np.ndarray:
        return np.array([spike.arc_length for spike in self.boundary_spikes])

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.arc_lengths)

    @property
    def centroid(self) -> Optional[float]:
        arc_lengths = self.arc_lengths
        return float(np.mean(arc_lengths)) if arc_lengths.size else None


def _parabola_vertex(minus: float, center: float, plus: float) -> Tuple[float, float]:
    """Offset in cells and height correction of the parabola through three equally spaced samples."""
    curvature = minus - 2.0 * center + plus
    if curvature >= 0:
        return 0.0, 0.0
    offset = float(np.clip(0.5 * (minus - plus) / curvature, -0.5, 0.5))
    return offset, -0.25 * (minus - plus) * offset


def _strict_local_maxima(field: np.ndarray, threshold_value: float) -> List[Tuple[int, int]]:
    n_rho = field.shape[0] - 1
    maxima = []
    if field[0, 0] > threshold_value and np.all(field[0, 0] > field[1]):
        maxima.append((0, 0))

    rows = field[1:]
    neighbours = []
    for d_rho in (-1, 0, 1):
        for d_theta in (-1, 0, 1):
            if d_rho == 0 and d_theta == 0:
                continue
            shifted = np.roll(field, -d_theta, axis=1)
            if d_rho == -1:
                candidate = shifted[0:n_rho]
            elif d_rho == 0:
                candidate = shifted[1:]
            else:
                # the boundary ring has no outer neighbour
                candidate = np.vstack([shifted[2:], np.full((1, field.shape[1]), -np.inf)])
            neighbours.append(candidate)
    is_maximum = (rows > threshold_value) & np.all([rows > candidate for candidate in neighbours], axis=0)
    maxima += [(int(i) + 1, int(j)) for i, j in zip(*np.nonzero(is_maximum))]
    return maxima


def detect_spikes(
    state: SimState,
    grid: SimGrid,
    threshold: float = DEFAULT_DETECTION_THRESHOLD,
    reference_parameter: Optional[float] = None,
) -> SpikeDetection:
    """
    Strict local maxima of u above threshold * max(u), refined by per-direction quadratic fits.

    Maxima within 2ε of the boundary get a signed arc-length coordinate from `reference_parameter`
    (default: the first curvature maximum).
    """
    if not 0 < threshold < 1:
        raise PreconditionError(f"Detection threshold must lie in (0, 1), got {threshold}")
    if reference_parameter is None:
        reference_parameter = default_reference_parameter(grid)

    field = grid.to_field(state.u)
    detection = SpikeDetection(threshold=threshold, reference_parameter=reference_parameter)
    for i, j in _strict_local_maxima(field, threshold * float(np.max(field))):
        height = float(field[i, j])
        rho, theta = grid.rho[i], grid.theta[j]
        if i > 0:
            theta_offset, theta_correction = _parabola_vertex(
                field[i, (j - 1) % grid.n_theta], field[i, j], field[i, (j + 1) % grid.n_theta]
            )
            # mirror image across ρ = 1 on the boundary ring
            outer = field[i + 1, j] if i < grid.n_rho else field[i - 1, j]
            rho_offset, rho_correction = _parabola_vertex(field[i - 1, j], field[i, j], outer)
            theta = float(np.mod(theta + theta_offset * grid.theta_spacing, TWO_PI))
            rho = float(min(rho + rho_offset * grid.rho_spacing, 1.0))
            height += theta_correction + rho_correction

        position = grid.logical_to_physical(rho, theta)
        boundary_distance = float(
            np.linalg.norm(position - grid.curve.position(grid.curve.nearest_parameter(position)))
        )
        arc_length = None
        if boundary_distance <= BOUNDARY_DISTANCE_IN_EPSILON * state.epsilon:
            arc_length = grid.curve.arc_length_coordinate(position, reference_parameter)
        detection.spikes.append(
            DetectedSpike(
                position=(float(position[0]), float(position[1])),
                height=height,
                rho=rho,
                theta=theta,
                boundary_distance=boundary_distance,
                arc_length=arc_length,
            )
        )

    logger.trace(
        f"t={state.t:.4f}: {len(detection.boundary_spikes)} boundary and {len(detection.interior_spikes)} interior "
        f"spike(s) above {threshold:.2f} max(u)"
    )
    return detection
