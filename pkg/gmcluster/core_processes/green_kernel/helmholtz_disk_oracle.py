import logging
from typing import Tuple

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import spsolve

from gmcluster.core_processes.green_kernel.half_plane_green import g0
from gmcluster.core_processes.green_kernel.modified_bessel import bessel_i0_i1

logger = logging.getLogger(__name__)


def solve_mollified_helmholtz_on_disk(
    disk_radius: float = 12.0,
    grid_n: int = 6000,
    mollifier_width: float = 0.02,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Finite-volume solve of -Δu + u = 2 φ on a disk with u = 0 on its rim, for a radial Gaussian φ.

    φ is normalized so that ∫ φ(|x|) I0(|x|) dx = 1; with that weight the mollified source reproduces
    K0 exactly outside its support, so u -> 2 K0 / (2π) = G0 away from the origin.
    """
    h = disk_radius / grid_n
    r = (np.arange(1, grid_n + 1) - 0.5) * h
    r_faces = np.arange(0, grid_n + 1) * h

    mollifier = np.exp(-0.5 * (r / mollifier_width) ** 2)
    i0, _ = bessel_i0_i1(r)
    mollifier /= 2.0 * np.pi * np.sum(mollifier * i0 * r * h)

    inner_flux = r_faces[:-1] / (r * h**2)
    outer_flux = r_faces[1:] / (r * h**2)
    main_diagonal = 1.0 + inner_flux + outer_flux
    # Dirichlet rim at r = disk_radius through the antisymmetric ghost cell
    main_diagonal[-1] += outer_flux[-1]
    operator = diags(
        [main_diagonal, -inner_flux[1:], -outer_flux[:-1]],
        offsets=[0, -1, 1],
        format="csc",
    )
    u = spsolve(operator, 2.0 * mollifier)
    return r, u


def reflection_consistency_error(radius_range: Tuple[float, float] = (0.5, 5.0), **solve_kwargs) -> float:
    """Max relative gap between the disk solve and g0 over `radius_range`."""
    r, u = solve_mollified_helmholtz_on_disk(**solve_kwargs)
    in_range = (r >= radius_range[0]) & (r <= radius_range[1])
    relative_error = np.abs(u[in_range] - g0(r[in_range])) / g0(r[in_range])
    worst = float(np.max(relative_error))
    logger.info(f"Helmholtz disk solve vs G0 on r in {radius_range}: max relative error {worst:.3e}")
    return worst
