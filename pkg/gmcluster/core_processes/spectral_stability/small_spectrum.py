import logging
from typing import List

import numpy as np
from pydantic import BaseModel, Field

from gmcluster.core_processes.green_kernel.half_plane_green import g0_double_prime
from gmcluster.core_processes.reduced_cluster.cluster_models import ClusterParams, SpikeConfiguration
from gmcluster.core_processes.spectral_stability.tridiagonal_eigen import tridiagonal_ql_implicit
from gmcluster.system.exceptions import PreconditionError

logger = logging.getLogger(__name__)

ZERO_EIGENVALUE_RELATIVE_THRESHOLD = 1e-10


class ModeClassification(BaseModel):
    mode: int
    eigenvalue: float
    classification: str = Field(..., description="stable, unstable or zero-to-leading-order")


class SmallSpectrumReport(BaseModel):
    """
    Small (O(ε³ log)) eigenvalues of a k-spike cluster, leading order only
    """

    k: int
    eigenvalues_A: List[float]
    eigenvalues_M: List[float]
    eigenvectors_M: List[List[float]] = Field(..., description="Rows are the per-spike weights of each mode")
    small_eigenvalues: List[float] = Field(..., description="-(ν2 ξσ / J1) μ_n for n = 1..k-1")
    closed_form_small_eigenvalues: List[float] = Field(..., description="(ν1 h''/(2 J1)) ε³ L n(n+1)")
    synchronous_eigenvalue: float = Field(..., description="(3/2) ν1 ε³ h'' / J1")
    repulsion_prefactor: float = Field(..., description="ν1 h'' / (2 J1)")
    curvature_prefactor: float = Field(..., description="(3/2) ν1 h'' / J1")
    modes: List[ModeClassification]
    asymptotic: bool = True
    warnings: List[str] = Field(default_factory=list)


def build_matrix_A(k: int) -> np.ndarray:
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    s = np.arange(1, k + 1)
    matrix = np.diag((s - 1) * (k - s + 1) + s * (k - s))
    coupling = -s[:-1] * (k - s[:-1])
    matrix += np.diag(coupling, 1) + np.diag(coupling, -1)
    return matrix


def eigenvalues_A(k: int) -> np.ndarray:
    matrix = build_matrix_A(k).astype(float)
    eigenvalues, _ = tridiagonal_ql_implicit(np.diag(matrix), np.diag(matrix, -1), compute_eigenvectors=False)
    return eigenvalues


def build_matrix_M(config: SpikeConfiguration, params: ClusterParams) -> np.ndarray:
    """
    Nearest-neighbor matrix of second tangential derivatives σ² G0''(σ gap) at the solved gaps.
    """
    if not isinstance(config, SpikeConfiguration) or not np.isfinite(config.residual_norm):
        raise PreconditionError("M needs a solved spike configuration")
    if config.k != params.k:
        raise PreconditionError(f"Configuration has {config.k} spikes, parameters expect {params.k}")
    if not config.is_ordered():
        raise PreconditionError(f"Spike offsets are not strictly increasing: {config.offsets}")

    matrix = np.zeros((config.k, config.k))
    if config.k == 1:
        return matrix
    weights = params.sigma**2 * g0_double_prime(params.sigma * config.gaps)
    for gap_index, weight in enumerate(weights):
        left, right = gap_index, gap_index + 1
        matrix[left, left] += weight
        matrix[right, right] += weight
        matrix[left, right] -= weight
        matrix[right, left] -= weight
    return matrix


def _classify(eigenvalue: float, scale: float) -> str:
    if abs(eigenvalue) <= ZERO_EIGENVALUE_RELATIVE_THRESHOLD * scale:
        return "zero-to-leading-order"
    return "stable" if eigenvalue < 0 else "unstable"


def small_eigenvalue_estimates(params: ClusterParams, config: SpikeConfiguration) -> SmallSpectrumReport:
    """
    λ(n) = -(ν2 ξσ / J1) μ_n(M) for n >= 1, its closed form (ν1 h''/(2 J1)) ε³ L n(n+1), and the synchronous
    mode (3/2) ν1 ε³ h'' / J1 fixed by the boundary curvature.
    """
    k = params.k
    matrix_m = build_matrix_M(config, params)
    mu, eigenvectors = tridiagonal_ql_implicit(np.diag(matrix_m), np.diag(matrix_m, -1))
    # fix the sign of each eigenvector so its largest entry is positive
    signs = np.sign(eigenvectors[np.argmax(np.abs(eigenvectors), axis=0), np.arange(k)])
    eigenvectors = eigenvectors * np.where(signs == 0, 1.0, signs)

    repulsion_prefactor = params.nu1 * params.h_double_prime / (2.0 * params.J1)
    curvature_prefactor = 1.5 * params.nu1 * params.h_double_prime / params.J1
    epsilon_cubed = params.epsilon**3
    modes = np.arange(1, k)

    small_eigenvalues = -(params.nu2 * params.xi_sigma / params.J1) * mu[1:]
    if k > 1:
        closed_form = repulsion_prefactor * epsilon_cubed * params.log_ratio * modes * (modes + 1)
    else:
        closed_form = np.zeros(0)
    synchronous_eigenvalue = curvature_prefactor * epsilon_cubed

    scale = max(np.max(np.abs(small_eigenvalues), initial=0.0), abs(synchronous_eigenvalue))
    classifications = [
        ModeClassification(
            mode=0, eigenvalue=synchronous_eigenvalue, classification=_classify(synchronous_eigenvalue, scale)
        )
    ]
    for mode, eigenvalue in zip(modes, small_eigenvalues):
        classifications.append(
            ModeClassification(mode=int(mode), eigenvalue=float(eigenvalue), classification=_classify(eigenvalue, scale))
        )

    report = SmallSpectrumReport(
        k=k,
        eigenvalues_A=eigenvalues_A(k).tolist(),
        eigenvalues_M=mu.tolist(),
        eigenvectors_M=eigenvectors.T.tolist(),
        small_eigenvalues=small_eigenvalues.tolist(),
        closed_form_small_eigenvalues=closed_form.tolist(),
        synchronous_eigenvalue=synchronous_eigenvalue,
        repulsion_prefactor=repulsion_prefactor,
        curvature_prefactor=curvature_prefactor,
        modes=classifications,
        warnings=params.regime_warnings() + list(config.warnings),
    )
    logger.info(
        f"Small spectrum for k={k}: synchronous λ={synchronous_eigenvalue:.4e}, "
        f"other modes {np.array2string(small_eigenvalues, precision=4)}"
    )
    return report
