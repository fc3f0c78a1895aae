import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from gmcluster.core_processes.ground_state.ground_state_models import GroundState
from gmcluster.system.exceptions import PreconditionError

logger = logging.getLogger(__name__)

MIN_ACCURATE_GRID_N = 500
DEFAULT_NLEP_R_MAX = 20.0
DEFAULT_NLEP_GRID_N = 800
GIERER_MEINHARDT_NONLOCAL_COUPLING = 2.0


@dataclass(frozen=True)
class NlepDiscretization:
    """
    Cell-centered radial grid r_j = (j - 1/2) h on (0, r_max] carrying ground-state samples, for one angular mode.
    """

    radii: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    mode: int = 0
    gamma: float = GIERER_MEINHARDT_NONLOCAL_COUPLING
    tau: float = 0.0
    warnings: List[str] = field(default_factory=list)

    @classmethod
    def from_ground_state(
        cls,
        gs: GroundState,
        r_max: float = DEFAULT_NLEP_R_MAX,
        grid_n: int = DEFAULT_NLEP_GRID_N,
        mode: int = 0,
        gamma: float = GIERER_MEINHARDT_NONLOCAL_COUPLING,
        tau: float = 0.0,
    ) -> "NlepDiscretization":
        if mode < 0:
            raise PreconditionError(f"Angular mode must be >= 0, got {mode}")
        if tau < 0:
            raise PreconditionError(f"τ must be >= 0, got {tau}")
        if r_max <= 0 or grid_n < 2:
            raise PreconditionError(f"Bad NLEP grid: r_max={r_max}, grid_n={grid_n}")

        warnings = []
        if grid_n < MIN_ACCURATE_GRID_N:
            warnings.append(f"grid_n={grid_n} < {MIN_ACCURATE_GRID_N}, eigenvalues are only roughly resolved")
            logger.warning(f"NLEP accuracy: {warnings[-1]}")

        h = r_max / grid_n
        radii = (np.arange(1, grid_n + 1) - 0.5) * h
        spline = CubicSpline(gs.radius_grid, gs.w, bc_type=((1, 0.0), "not-a-knot"))
        inside = radii <= gs.r_max
        w = np.where(inside, spline(np.minimum(radii, gs.r_max)), gs.value_at(radii))
        w_prime = np.where(inside, spline.derivative()(np.minimum(radii, gs.r_max)), gs.derivative_at(radii))
        return cls(radii=radii, w=w, w_prime=w_prime, mode=mode, gamma=gamma, tau=tau, warnings=warnings)

    @property
    def grid_n(self) -> int:
        return int(self.radii.size)

    @property
    def spacing(self) -> float:
        return float(self.radii[1] - self.radii[0]) if self.radii.size > 1 else float(2.0 * self.radii[0])

    @property
    def r_max(self) -> float:
        return float(self.radii[-1] + 0.5 * self.spacing)

    @property
    def quadrature_weights(self) -> np.ndarray:
        """Midpoint weights r_j h for ∫ f r dr."""
        return self.radii * self.spacing

    @property
    def nonlocal_active(self) -> bool:
        return self.mode == 0 and self.gamma != 0

    def with_mode(self, mode: int) -> "NlepDiscretization":
        return replace(self, mode=mode)

    def with_gamma(self, gamma: float) -> "NlepDiscretization":
        return replace(self, gamma=gamma)

    def with_tau(self, tau: float) -> "NlepDiscretization":
        if tau < 0:
            raise PreconditionError(f"τ must be >= 0, got {tau}")
        return replace(self, tau=tau)


@dataclass
class TauSweep:
    table: pd.DataFrame
    first_crossing_tau: Optional[float] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def taus(self) -> np.ndarray:
        return self.table["tau"].to_numpy()

    @property
    def max_real_parts(self) -> np.ndarray:
        return self.table["max_re_lambda"].to_numpy()
