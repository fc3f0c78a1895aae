import logging
from typing import Optional, Tuple

import numpy as np

from gmcluster.core_processes.nlep_solver.nlep_models import NlepDiscretization

logger = logging.getLogger(__name__)


def local_bands(mode: int, grid: NlepDiscretization) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (lower, diagonal, upper) of φ'' + φ'/r - m²φ/r² - φ + 2wφ in conservative form
    [r_{j+1/2}(φ_{j+1} - φ_j) - r_{j-1/2}(φ_j - φ_{j-1})] / (r_j h²).

    The inner face sits at r = 0 and carries no flux; the outer face at r_max is Dirichlet through an
    antisymmetric ghost cell.
    """
    r = grid.radii
    h = grid.spacing
    inner_face = r - 0.5 * h
    outer_face = r + 0.5 * h
    inner = inner_face / (r * h**2)
    outer = outer_face / (r * h**2)

    diagonal = -(inner + outer) - mode**2 / r**2 - 1.0 + 2.0 * grid.w
    diagonal[-1] -= outer[-1]
    return inner[1:], diagonal, outer[:-1]


def assemble_local(mode: int, grid: NlepDiscretization) -> np.ndarray:
    lower, diagonal, upper = local_bands(mode, grid)
    return np.diag(diagonal) + np.diag(lower, -1) + np.diag(upper, 1)


def nonlocal_rank_one(grid: NlepDiscretization) -> Tuple[np.ndarray, np.ndarray]:
    """
    (left, right) with the nonlocal term equal to coefficient * left ⊗ right:
    -(∫ w φ / ∫ w²) w²  ->  left = -w² / ∫ w², right = quadrature weights * w.
    """
    weights = grid.quadrature_weights
    w_squared_integral = float(np.sum(grid.w**2 * weights))
    return -(grid.w**2) / w_squared_integral, grid.w * weights


def assemble_nlep(grid: NlepDiscretization, coefficient: Optional[complex] = None) -> np.ndarray:
    """Local part plus `coefficient` times the rank-one part, mode 0 only; the coefficient defaults to γ."""
    matrix = assemble_local(grid.mode, grid).astype(complex if np.iscomplexobj(coefficient) else float)
    if grid.mode != 0:
        return matrix
    if coefficient is None:
        coefficient = grid.gamma
    if coefficient != 0:
        left, right = nonlocal_rank_one(grid)
        matrix = matrix + coefficient * np.outer(left, right)
    return matrix


def apply_polar_operator(field: np.ndarray, grid: NlepDiscretization) -> np.ndarray:
    """
    Δφ - φ + 2wφ for a 2-D field sampled on (radii × uniform angles), angular derivative by FFT.
    """
    n_theta = field.shape[1]
    lower, diagonal, upper = local_bands(0, grid)
    radial = diagonal[:, None] * field
    radial[1:] += lower[:, None] * field[:-1]
    radial[:-1] += upper[:, None] * field[1:]

    wavenumbers = np.fft.fftfreq(n_theta, d=1.0 / n_theta)
    angular_second_derivative = np.real(np.fft.ifft(-(wavenumbers**2) * np.fft.fft(field, axis=1), axis=1))
    return radial + angular_second_derivative / grid.radii[:, None] ** 2
