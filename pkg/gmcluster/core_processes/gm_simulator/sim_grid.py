import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Tuple

import numpy as np
from scipy import sparse

from gmcluster.core_processes.domain_geometry.boundary_curve import TWO_PI, BoundaryCurve
from gmcluster.system.exceptions import GeometryError, PreconditionError

logger = logging.getLogger(__name__)

MIN_RADIAL_CELLS = 4
MIN_ANGULAR_CELLS = 8


@dataclass(frozen=True)
class SimGrid:
    """
    Boundary-fitted polar grid of a star-shaped domain r <= f(θ).

    Nodes sit at (ρ_i, θ_j) = (i/n_ρ, 2πj/n_θ), i = 0..n_ρ, mapped to (x, y) = ρ f(θ) (cos θ, sin θ), so ρ = 1 is
    the boundary. Row i = 0 is the pole and carries a single unknown. Every node owns a finite-volume cell
    (a disk at the pole, half cells on ρ = 1), which keeps the discrete Laplacian conservative and the
    Neumann condition an exact zero-flux condition.
    """

    curve: BoundaryCurve
    n_rho: int
    n_theta: int
    theta: np.ndarray
    boundary_radius: np.ndarray
    boundary_radius_prime: np.ndarray
    cell_areas: np.ndarray
    stiffness: sparse.csr_matrix

    @property
    def rho(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_rho + 1)

    @property
    def rho_spacing(self) -> float:
        return 1.0 / self.n_rho

    @property
    def theta_spacing(self) -> float:
        return TWO_PI / self.n_theta

    @property
    def unknowns(self) -> int:
        return 1 + self.n_rho * self.n_theta

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rho + 1, self.n_theta

    @property
    def metric_jacobian(self) -> np.ndarray:
        """J = ρ f(θ)² at every node, shape (n_ρ+1, n_θ)."""
        return self.rho[:, None] * self.boundary_radius[None, :] ** 2

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        radius = self.rho[:, None] * self.boundary_radius[None, :]
        return radius * np.cos(self.theta)[None, :], radius * np.sin(self.theta)[None, :]

    @cached_property
    def laplacian(self) -> sparse.csr_matrix:
        return sparse.diags(1.0 / self.cell_areas) @ self.stiffness

    def node_index(self, i: int, j) -> np.ndarray:
        j = np.mod(np.asarray(j), self.n_theta)
        if i == 0:
            return np.zeros_like(j)
        return 1 + (i - 1) * self.n_theta + j

    def to_field(self, vector: np.ndarray) -> np.ndarray:
        """Unknown vector -> array of shape (n_ρ+1, n_θ) with the pole value repeated along row 0."""
        vector = np.asarray(vector)
        return np.vstack([np.full(self.n_theta, vector[0]), vector[1:].reshape(self.n_rho, self.n_theta)])

    def to_vector(self, field: np.ndarray) -> np.ndarray:
        """Field of shape (n_ρ+1, n_θ) -> unknown vector; the pole takes the mean of row 0."""
        field = np.asarray(field, dtype=float)
        if field.shape != self.shape:
            raise PreconditionError(f"Field shape {field.shape} does not match grid shape {self.shape}")
        return np.concatenate([[np.mean(field[0])], field[1:].ravel()])

    def sample(self, function) -> np.ndarray:
        """Evaluate function(x, y) at every unknown."""
        x, y = self.coordinates
        return self.to_vector(function(x, y))

    def integrate(self, vector: np.ndarray) -> float:
        return float(self.cell_areas @ vector)

    def apply_laplacian(self, vector: np.ndarray) -> np.ndarray:
        return self.laplacian @ vector

    def boundary_normal_derivative(self, vector: np.ndarray) -> np.ndarray:
        """
        Outward normal derivative along ρ = 1: one-sided second-order in ρ, spectral in θ.
        """
        if self.n_rho < 2:
            raise PreconditionError("Normal derivative needs at least two radial cells")
        field = self.to_field(vector)
        h = self.rho_spacing
        u_rho = (3.0 * field[-1] - 4.0 * field[-2] + field[-3]) / (2.0 * h)
        wavenumbers = np.fft.fftfreq(self.n_theta, d=1.0 / self.n_theta)
        u_theta = np.real(np.fft.ifft(1j * wavenumbers * np.fft.fft(field[-1])))

        f, f_prime = self.boundary_radius, self.boundary_radius_prime
        g_rho_rho = (f**2 + f_prime**2) / f**4
        g_rho_theta = -f_prime / f**3
        return (g_rho_rho * u_rho + g_rho_theta * u_theta) / np.sqrt(g_rho_rho)

    def logical_to_physical(self, rho: float, theta: float) -> np.ndarray:
        radius = rho * float(self.curve.radius_at_angle(theta))
        return np.array([radius * np.cos(theta), radius * np.sin(theta)])


class _FluxAssembler:
    """Collects face fluxes; each flux is added to the cell it leaves and subtracted from the cell it enters."""

    def __init__(self):
        self.rows: List[np.ndarray] = []
        self.columns: List[np.ndarray] = []
        self.values: List[np.ndarray] = []

    def add_flux(self, source_cells, target_cells, terms):
        for columns, coefficients in terms:
            columns, coefficients = np.broadcast_arrays(columns, coefficients)
            self.rows += [np.broadcast_to(source_cells, columns.shape), np.broadcast_to(target_cells, columns.shape)]
            self.columns += [columns, columns]
            self.values += [coefficients, -coefficients]

    def to_csr(self, size: int) -> sparse.csr_matrix:
        rows = np.concatenate([np.ravel(r) for r in self.rows])
        columns = np.concatenate([np.ravel(c) for c in self.columns])
        values = np.concatenate([np.ravel(v) for v in self.values])
        return sparse.coo_matrix((values, (rows, columns)), shape=(size, size)).tocsr()


def build_grid(curve: BoundaryCurve, n_rho: int, n_theta: int) -> SimGrid:
    """
    Assemble cell areas and the area-weighted Laplacian (stiffness) of the mapped grid.

    In (ρ, θ) the Laplacian reads (1/(ρ f²)) [∂ρ(ρ(1+q²) u_ρ - q u_θ) + ∂θ(-q u_ρ + u_θ/ρ)], q = f'/f.
    """
    if n_rho < MIN_RADIAL_CELLS or n_theta < MIN_ANGULAR_CELLS:
        raise PreconditionError(
            f"Grid needs n_rho >= {MIN_RADIAL_CELLS} and n_theta >= {MIN_ANGULAR_CELLS}, got ({n_rho}, {n_theta})"
        )

    # nodes on even entries, θ-faces on odd entries
    fine_theta, fine_radius, fine_radius_prime, _ = curve.radial_profile(2 * n_theta)
    if np.min(fine_radius) <= 0:
        raise GeometryError(f"`{curve.kind}` curve is not star-shaped about the origin")
    theta, f, f_prime = fine_theta[0::2], fine_radius[0::2], fine_radius_prime[0::2]
    q_node = f_prime / f
    q_face = fine_radius_prime[1::2] / fine_radius[1::2]

    h_rho = 1.0 / n_rho
    h_theta = TWO_PI / n_theta
    j = np.arange(n_theta)
    size = 1 + n_rho * n_theta

    def index(i, jj):
        jj = np.mod(jj, n_theta)
        return np.zeros_like(jj) if i == 0 else 1 + (i - 1) * n_theta + jj

    def cell_bounds(i):
        return max(0.0, (i - 0.5) * h_rho), min(1.0, (i + 0.5) * h_rho)

    cell_areas = np.empty(size)
    cell_areas[0] = 0.5 * (0.5 * h_rho) ** 2 * np.sum(f**2) * h_theta
    for i in range(1, n_rho + 1):
        low, high = cell_bounds(i)
        cell_areas[index(i, j)] = 0.5 * (high**2 - low**2) * f**2 * h_theta

    assembler = _FluxAssembler()

    # ρ-faces between ring i and ring i+1; no flux through ρ = 1
    for i in range(n_rho):
        inner, outer = index(i, j), index(i + 1, j)
        rho_face = (i + 0.5) * h_rho
        normal_coefficient = h_theta * rho_face * (1.0 + q_node**2) / h_rho
        terms = [(outer, normal_coefficient), (inner, -normal_coefficient)]
        # -q ∂θu averaged over both rings, central differences, zero at the pole
        for ring in (i, i + 1):
            if ring > 0:
                terms += [(index(ring, j + 1), -0.25 * q_node), (index(ring, j - 1), 0.25 * q_node)]
        assembler.add_flux(inner, outer, terms)

    # θ-faces between (i, j) and (i, j+1)
    for i in range(1, n_rho + 1):
        left, right = index(i, j), index(i, j + 1)
        low, high = cell_bounds(i)
        tangential_coefficient = np.log(high / low) / h_theta
        terms = [(right, np.full(n_theta, tangential_coefficient)), (left, np.full(n_theta, -tangential_coefficient))]
        # -q ∂ρu averaged over both nodes of the face
        cross = -(high - low) * q_face * 0.5
        for column in (j, j + 1):
            if i < n_rho:
                terms += [
                    (index(i + 1, column), cross / (2.0 * h_rho)),
                    (index(i - 1, column), -cross / (2.0 * h_rho)),
                ]
            else:
                terms += [(index(i, column), cross / h_rho), (index(i - 1, column), -cross / h_rho)]
        assembler.add_flux(left, right, terms)

    stiffness = assembler.to_csr(size)
    logger.debug(
        f"Built {n_rho}x{n_theta} grid on `{curve.kind}` curve: {size} unknowns, {stiffness.nnz} stiffness entries"
    )
    return SimGrid(
        curve=curve,
        n_rho=n_rho,
        n_theta=n_theta,
        theta=theta,
        boundary_radius=f,
        boundary_radius_prime=f_prime,
        cell_areas=cell_areas,
        stiffness=stiffness,
    )
