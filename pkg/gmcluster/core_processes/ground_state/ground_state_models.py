import logging
from dataclasses import dataclass
from typing import Dict, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

# w(r) ~ C e^(-r) sum_k TAIL_SERIES_COEFFICIENTS[k] r^(-1/2-k) beyond the matching radius
TAIL_SERIES_COEFFICIENTS = (1.0, -1.0 / 8.0, 9.0 / 128.0)

PowerSeries = Dict[float, float]


def tail_value_series(tail_coefficient: float) -> PowerSeries:
    """Powers and coefficients of e^r w(r) in the tail."""
    return {-0.5 - k: tail_coefficient * c for k, c in enumerate(TAIL_SERIES_COEFFICIENTS)}


def tail_derivative_series(tail_coefficient: float) -> PowerSeries:
    """Powers and coefficients of e^r w'(r) in the tail."""
    series: PowerSeries = {}
    for power, coefficient in tail_value_series(tail_coefficient).items():
        series[power] = series.get(power, 0.0) - coefficient
        series[power - 1.0] = series.get(power - 1.0, 0.0) + power * coefficient
    return series


def evaluate_power_series(series: PowerSeries, r: np.ndarray) -> np.ndarray:
    return sum(coefficient * r**power for power, coefficient in series.items())


@dataclass(frozen=True)
class GroundState:
    """
    Radial profile of the ground state, Δw - w + w^2 = 0 in R^2, on a uniform grid r_j = j*h.

    Values beyond `tail_matching_radius` come from the matched exponential tail.
    """

    radius_grid: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    central_value: float
    grid_spacing: float
    tail_matching_radius: float
    tail_matching_index: int
    tail_coefficient: float
    shooting_iterations: int = 0

    @property
    def r_max(self) -> float:
        return float(self.radius_grid[-1])

    @property
    def grid_n(self) -> int:
        return int(self.radius_grid.size - 1)

    def tail_value(self, r: Union[float, np.ndarray]) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.exp(-r) * evaluate_power_series(tail_value_series(self.tail_coefficient), r)

    def tail_derivative(self, r: Union[float, np.ndarray]) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.exp(-r) * evaluate_power_series(tail_derivative_series(self.tail_coefficient), r)

    def value_at(self, r: Union[float, np.ndarray]) -> np.ndarray:
        """w(r) for any r >= 0: grid interpolation inside the grid, tail outside."""
        r = np.abs(np.asarray(r, dtype=float))
        inside = np.interp(r, self.radius_grid, self.w)
        return np.where(r > self.r_max, self.tail_value(np.maximum(r, self.r_max)), inside)

    def derivative_at(self, r: Union[float, np.ndarray]) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        inside = np.interp(r, self.radius_grid, self.w_prime)
        return np.where(r > self.r_max, self.tail_derivative(np.maximum(r, self.r_max)), inside)

    def ode_residual(self, include_seam: bool = False) -> np.ndarray:
        """
        Second-order stencil residual of w'' + w'/r - w + w^2 at the interior nodes r_1 .. r_{n-1}.

        The two stencils straddling the tail seam mix the discrete profile with the continuous tail and are NaN
        unless `include_seam` is set; the seam itself is measured by `seam_slope_mismatch`.
        """
        h = self.grid_spacing
        r_interior = self.radius_grid[1:-1]
        w_left, w_center, w_right = self.w[:-2], self.w[1:-1], self.w[2:]
        laplacian = (w_right - 2.0 * w_center + w_left) / h**2 + (w_right - w_left) / (2.0 * h * r_interior)
        residual = laplacian - w_center + w_center**2
        if not include_seam:
            # interior index j - 1 is the stencil centred on node j
            seam_stencils = [self.tail_matching_index - 1, self.tail_matching_index]
            residual[[index for index in seam_stencils if 0 <= index < residual.size]] = np.nan
        return residual

    def max_ode_residual(self) -> float:
        return float(np.nanmax(np.abs(self.ode_residual())))

    def seam_slope_mismatch(self) -> float:
        """Relative gap between the profile's backward-difference slope and the tail slope at the seam."""
        m, h = self.tail_matching_index, self.grid_spacing
        profile_slope = (3.0 * self.w[m] - 4.0 * self.w[m - 1] + self.w[m - 2]) / (2.0 * h)
        tail_slope = float(self.tail_derivative(self.radius_grid[m]))
        return float(abs(profile_slope - tail_slope) / abs(tail_slope))

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({"r": self.radius_grid, "w": self.w, "w_prime": self.w_prime})


class GroundStateMoments(BaseModel):
    """
    Half-plane moment integrals of the ground state, keyed by symbol name
    """

    I2: float = Field(..., gt=0, description="∫_{R^2_+} w^2 dy")
    I3: float = Field(..., gt=0, description="∫_{R^2_+} w^3 dy")
    Igrad: float = Field(..., gt=0, description="∫_{R^2_+} |∇w|^2 dy")
    J1: float = Field(..., gt=0, description="∫_{R^2_+} (∂w/∂y1)^2 dy")
    nu1: float = Field(..., gt=0, description="(1/3) ∫_R w'(|y1|)^2 y1^2 dy1")
    nu2: float = Field(..., gt=0, description="(1/3) I3 I2")
    M1: float = Field(..., description="∫_{R^2_+} w (∂w/∂y1) y1 dy")

    def identity_residuals(self) -> Dict[str, float]:
        return {
            "pohozaev_I3_vs_1.5_I2": abs(self.I3 - 1.5 * self.I2) / self.I3,
            "energy_Igrad_vs_0.5_I2": abs(self.Igrad - 0.5 * self.I2) / self.Igrad,
            "energy_Igrad_plus_I2_vs_I3": abs(self.Igrad + self.I2 - self.I3) / self.I3,
            "first_moment_2M1_plus_I2": abs(2.0 * self.M1 + self.I2) / self.I2,
        }
