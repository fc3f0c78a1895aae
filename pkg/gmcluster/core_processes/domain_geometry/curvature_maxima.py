import logging
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from gmcluster.core_processes.domain_geometry.boundary_curve import TWO_PI, BoundaryCurve

logger = logging.getLogger(__name__)

DEGENERACY_RELATIVE_THRESHOLD = 1e-6
CONSTANT_CURVATURE_RELATIVE_THRESHOLD = 1e-10
BISECTION_PARAMETER_TOLERANCE = 1e-12
SCAN_POINTS_PER_SAMPLE = 4


class CurvatureMax(BaseModel):
    """
    A boundary point P0 where the curvature h has a local maximum in arc length
    """

    parameter: float = Field(..., description="Curve parameter t* in [0, 2pi)")
    position: Tuple[float, float] = Field(..., description="P0 in domain coordinates")
    curvature: float = Field(..., description="h(P0), 1/length")
    curvature_first_derivative: float = Field(..., description="dh/ds at P0, zero up to the bisection tolerance")
    curvature_second_derivative: float = Field(..., description="d^2h/ds^2 at P0, per unit arc length squared")


class CurvatureMaximaSearch(BaseModel):
    maxima: List[CurvatureMax] = Field(default_factory=list, description="Nondegenerate maxima sorted by parameter")
    degenerate_points: List[CurvatureMax] = Field(
        default_factory=list, description="Critical points with |h''| below the degeneracy threshold"
    )
    diagnostics: List[str] = Field(default_factory=list)

    def __len__(self):
        return len(self.maxima)

    def __iter__(self):
        return iter(self.maxima)

    def __getitem__(self, index: int) -> CurvatureMax:
        return self.maxima[index]


def _bisect_decreasing_root(curve: BoundaryCurve, t_low: float, t_high: float) -> float:
    """Root of h'(t) on [t_low, t_high] with h'(t_low) > 0 >= h'(t_high)."""
    while t_high - t_low > BISECTION_PARAMETER_TOLERANCE:
        t_mid = 0.5 * (t_low + t_high)
        if t_mid in (t_low, t_high):
            break
        _, h_prime_mid, _ = curve.curvature_and_arc_length_derivatives(t_mid)
        if h_prime_mid > 0:
            t_low = t_mid
        else:
            t_high = t_mid
    return 0.5 * (t_low + t_high)


def find_curvature_maxima(curve: BoundaryCurve) -> CurvatureMaximaSearch:
    """
    Locate the nondegenerate local maxima of the boundary curvature.

    h'(t) is scanned on a uniform grid, every + to - sign change is bisected to 1e-12 in t, and
    points with |h''| < 1e-6 * max|h| are moved to `degenerate_points`.
    """
    scan_t = np.linspace(0.0, TWO_PI, SCAN_POINTS_PER_SAMPLE * curve.samples_per_period, endpoint=False)
    scan_step = TWO_PI / scan_t.size
    kappa, h_prime, _ = curve.curvature_and_arc_length_derivatives(scan_t)
    curvature_scale = float(np.max(np.abs(kappa)))

    search = CurvatureMaximaSearch()
    if np.max(np.abs(h_prime)) <= CONSTANT_CURVATURE_RELATIVE_THRESHOLD * curvature_scale:
        search.diagnostics.append("degenerate: constant curvature")
        logger.info(f"Curve `{curve.kind}` has constant curvature {curvature_scale:.6g}, no isolated maxima")
        return search

    roots = []
    # periodic scan, the last interval wraps onto the first sample
    for index in range(scan_t.size):
        next_index = (index + 1) % scan_t.size
        if h_prime[index] > 0 >= h_prime[next_index]:
            t_low = float(scan_t[index])
            root = _bisect_decreasing_root(curve, t_low, t_low + scan_step)
            root = float(np.mod(root, TWO_PI))
            if TWO_PI - root < BISECTION_PARAMETER_TOLERANCE:
                root = 0.0
            if not any(abs(np.mod(root - known + np.pi, TWO_PI) - np.pi) < 1e-9 for known in roots):
                roots.append(root)

    for root in sorted(roots):
        kappa_root, h_prime_root, h_double_prime_root = curve.curvature_and_arc_length_derivatives(root)
        position = curve.position(root)
        candidate = CurvatureMax(
            parameter=root,
            position=(float(position[0]), float(position[1])),
            curvature=float(kappa_root),
            curvature_first_derivative=float(h_prime_root),
            curvature_second_derivative=float(h_double_prime_root),
        )
        if abs(h_double_prime_root) < DEGENERACY_RELATIVE_THRESHOLD * curvature_scale:
            search.degenerate_points.append(candidate)
            search.diagnostics.append(f"degenerate: critical point at t={root:.12f} with h''={h_double_prime_root:.3e}")
        else:
            search.maxima.append(candidate)

    logger.info(
        f"Found {len(search.maxima)} nondegenerate curvature maxima on `{curve.kind}` curve "
        f"({len(search.degenerate_points)} degenerate)"
    )
    for curvature_max in search.maxima:
        logger.debug(
            f"  t*={curvature_max.parameter:.10f} h={curvature_max.curvature:.10g} "
            f"h''={curvature_max.curvature_second_derivative:.10g}"
        )
    return search
