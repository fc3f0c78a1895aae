import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from gmcluster.core_processes.green_kernel.modified_bessel import bessel_k0_k1
from gmcluster.system.exceptions import DomainError, ExpansionMismatchError, PreconditionError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

EXPANSION_FIT_RADII = np.logspace(-5, -2, 40)
EXPANSION_FIT_RESIDUAL_TOLERANCE = 1e-8


class GreenExpansionCoefficients(BaseModel):
    """
    G0(r) = -(1/π) log r + c1 + c2 r^2 log r + c3 r^2 + O(r^4 log r) as r -> 0
    """

    c1: float = Field(..., description="Constant term, (ln 2 - γ)/π")
    c2: float = Field(..., description="r^2 log r coefficient, -1/(4π)")
    c3: float = Field(..., description="r^2 coefficient of the smooth remainder ψ")
    fit_residual: float = Field(..., ge=0, description="Max absolute residual over the fit radii")


@dataclass(frozen=True)
class HalfPlaneGreen:
    """
    Neumann Green's function of -Δ + 1 on the upper half plane, G0(r) = K0(r)/π by even reflection.
    """

    def _bessel(self, r: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0) or np.any(~np.isfinite(r)):
            raise DomainError(f"Green's function needs finite r > 0, got min r = {np.min(r)}")
        return bessel_k0_k1(r)

    def g0(self, r: ArrayLike) -> np.ndarray:
        k0, _ = self._bessel(r)
        return k0 / np.pi

    def g0_prime(self, r: ArrayLike) -> np.ndarray:
        _, k1 = self._bessel(r)
        return -k1 / np.pi

    def g0_double_prime(self, r: ArrayLike) -> np.ndarray:
        # K0'' = K0 + K1/r
        k0, k1 = self._bessel(r)
        return (k0 + k1 / np.asarray(r, dtype=float)) / np.pi

    def table(self, r: ArrayLike) -> pd.DataFrame:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        k0, k1 = self._bessel(r)
        return pd.DataFrame({"r": r, "g0": k0 / np.pi, "g0_prime": -k1 / np.pi})


HALF_PLANE_GREEN = HalfPlaneGreen()


def g0(r: ArrayLike) -> np.ndarray:
    return HALF_PLANE_GREEN.g0(r)


def g0_prime(r: ArrayLike) -> np.ndarray:
    return HALF_PLANE_GREEN.g0_prime(r)


def g0_double_prime(r: ArrayLike) -> np.ndarray:
    return HALF_PLANE_GREEN.g0_double_prime(r)


@lru_cache(maxsize=1)
def fit_expansion_coefficients() -> GreenExpansionCoefficients:
    """
    Least-squares fit of g0(r) + (1/π) log r against {1, r^2 log r, r^2} on r in [1e-5, 1e-2].
    """
    r = EXPANSION_FIT_RADII
    target = g0(r) + np.log(r) / np.pi
    basis = np.column_stack([np.ones_like(r), r**2 * np.log(r), r**2])
    column_scale = np.max(np.abs(basis), axis=0)
    scaled_solution, *_ = np.linalg.lstsq(basis / column_scale, target, rcond=None)
    coefficients = scaled_solution / column_scale
    fit_residual = float(np.max(np.abs(basis @ coefficients - target)))
    if fit_residual > EXPANSION_FIT_RESIDUAL_TOLERANCE:
        raise ExpansionMismatchError(f"Small-r expansion fit residual {fit_residual:.3e} exceeds tolerance")

    expansion = GreenExpansionCoefficients(
        c1=coefficients[0], c2=coefficients[1], c3=coefficients[2], fit_residual=fit_residual
    )
    logger.debug(f"G0 expansion: c1={expansion.c1:.12f}, c2={expansion.c2:.12f}, residual {fit_residual:.2e}")
    return expansion


def expansion_coefficients() -> Tuple[float, float]:
    expansion = fit_expansion_coefficients()
    return expansion.c1, expansion.c2


def interaction_order(spacing: float, sigma: float, hops: int = 1) -> float:
    """
    Order of magnitude of G(σ p_i, σ p_j) for spikes `hops` neighbors apart with gap `spacing`.

    At equilibrium e^{-σd} ~ εD/ξσ and σd ~ log(ξσ/(εD)), so (σd e^{-σd})^hops tracks
    ((εD/ξσ) log(ξσ/(εD)))^hops.
    """
    if spacing <= 0 or sigma <= 0:
        raise PreconditionError(f"spacing and sigma must be positive, got {spacing}, {sigma}")
    if hops < 1:
        raise PreconditionError(f"hops must be >= 1, got {hops}")
    scaled_gap = sigma * spacing
    return float((scaled_gap * np.exp(-scaled_gap)) ** hops)


def interaction_order_from_params(epsilon: float, diffusivity: float, xi_sigma: float, hops: int = 1) -> float:
    """((εD/ξσ) log(ξσ/(εD)))^hops straight from the cluster parameters."""
    if hops < 1:
        raise PreconditionError(f"hops must be >= 1, got {hops}")
    ratio = epsilon * diffusivity / xi_sigma
    if not 0 < ratio < 1:
        raise PreconditionError(f"εD/ξσ must be in (0, 1), got {ratio}")
    return float((ratio * np.log(1.0 / ratio)) ** hops)
