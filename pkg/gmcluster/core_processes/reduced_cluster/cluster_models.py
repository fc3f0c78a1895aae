import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, validator

from gmcluster.core_processes.ground_state.ground_state_models import GroundStateMoments
from gmcluster.system.exceptions import RegimeError

logger = logging.getLogger(__name__)


def height_scale(sigma: float, i2: float) -> float:
    """ξσ = (π⁻¹ log(1/σ) I2)⁻¹"""
    if not 0 < sigma < 1:
        raise RegimeError(f"Height scale needs 0 < σ < 1, got σ={sigma}")
    return 1.0 / (np.log(1.0 / sigma) * i2 / np.pi)


class ClusterParams(BaseModel):
    """
    Parameters of a k-spike boundary cluster in the ε-rescaled frame, with the ground-state moments they consume
    """

    epsilon: float = Field(..., gt=0, description="Activator diffusion length ε")
    diffusivity: float = Field(..., gt=0, description="Inhibitor diffusivity D")
    tau: float = Field(0.0, ge=0, description="Inhibitor time constant τ (used by the NLEP and the simulator)")
    k: int = Field(..., ge=1, description="Number of spikes")
    I2: float = Field(..., gt=0)
    nu1: float = Field(..., gt=0)
    nu2: float = Field(..., gt=0)
    J1: float = Field(..., gt=0)
    h_double_prime: float = Field(..., lt=0, description="d²h/ds² at the curvature maximum, per unit arc length squared")
    regime_safety_ratio: float = Field(1.0, ge=1.0, description="Slack demanded on both sides of e^(-1/√D) < ε < √D")

    @validator("h_double_prime")
    def curvature_maximum_must_be_strict(cls, value):
        if not np.isfinite(value):
            raise ValueError("h'' must be finite")
        return value

    @classmethod
    def from_moments(
        cls,
        moments: GroundStateMoments,
        epsilon: float,
        diffusivity: float,
        k: int,
        h_double_prime: float,
        tau: float = 0.0,
        regime_safety_ratio: float = 1.0,
    ) -> "ClusterParams":
        return cls(
            epsilon=epsilon,
            diffusivity=diffusivity,
            tau=tau,
            k=k,
            I2=moments.I2,
            nu1=moments.nu1,
            nu2=moments.nu2,
            J1=moments.J1,
            h_double_prime=h_double_prime,
            regime_safety_ratio=regime_safety_ratio,
        )

    @property
    def sigma(self) -> float:
        return self.epsilon / np.sqrt(self.diffusivity)

    @property
    def xi_sigma(self) -> float:
        return height_scale(self.sigma, self.I2)

    @property
    def log_ratio(self) -> float:
        """L = log(ξσ / (εD))"""
        return float(np.log(self.xi_sigma / (self.epsilon * self.diffusivity)))

    @property
    def interaction_coefficient(self) -> float:
        """ν2 ξσ σ"""
        return self.nu2 * self.xi_sigma * self.sigma

    @property
    def curvature_coefficient(self) -> float:
        """ν1 ε³ h'', negative"""
        return self.nu1 * self.epsilon**3 * self.h_double_prime

    def regime_warnings(self) -> List[str]:
        warnings = []
        sqrt_d = np.sqrt(self.diffusivity)
        if not np.exp(-1.0 / sqrt_d) * self.regime_safety_ratio < self.epsilon:
            warnings.append(f"ε={self.epsilon:.3e} is not above e^(-1/√D)={np.exp(-1.0 / sqrt_d):.3e}")
        if not self.epsilon * self.regime_safety_ratio < sqrt_d:
            warnings.append(f"ε={self.epsilon:.3e} is not below √D={sqrt_d:.3e}")
        if self.sigma < 1 and self.log_ratio <= 1:
            warnings.append(f"log(ξσ/(εD))={self.log_ratio:.3f} <= 1, cluster asymptotics are meaningless")
        for warning in warnings:
            logger.warning(f"Regime check: {warning}")
        return warnings


@dataclass
class SpikeConfiguration:
    """Tangential offsets s_1 < ... < s_k from the curvature maximum, ε-rescaled, and spike heights."""

    offsets: np.ndarray
    heights: Optional[np.ndarray] = None
    residual_norm: float = float("nan")
    iterations: int = 0
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.offsets = np.asarray(self.offsets, dtype=float)
        if self.heights is not None:
            self.heights = np.asarray(self.heights, dtype=float)

    @property
    def k(self) -> int:
        return int(self.offsets.size)

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def mean_offset(self) -> float:
        return float(np.mean(self.offsets))

    def is_ordered(self) -> bool:
        return bool(np.all(self.gaps > 0))

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "offsets": self.offsets.tolist(),
            "gaps": self.gaps.tolist(),
            "heights": None if self.heights is None else self.heights.tolist(),
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "warnings": list(self.warnings),
        }


class AdmissibilityCheck(BaseModel):
    name: str
    passed: bool
    deviation: float = Field(..., description="Measured distance from the window center")
    bound: float
    margin: float = Field(..., description="bound - |deviation|, negative when violated")


class AdmissibilityReport(BaseModel):
    eta: float
    checks: List[AdmissibilityCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed_checks(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]
