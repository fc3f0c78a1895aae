import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from gmcluster.core_processes.gm_simulator.sim_grid import SimGrid
from gmcluster.core_processes.gm_simulator.sim_state import SimState
from gmcluster.system.exceptions import PreconditionError, StepFailureError

logger = logging.getLogger(__name__)

DEFAULT_POSITIVITY_FLOOR = 1e-8
MAX_STEP_HALVINGS = 10
LINEAR_SOLVE_RELATIVE_TOLERANCE = 1e-8


@dataclass
class StepDiagnostics:
    mass: float
    min_u: float
    min_v: float
    substeps: int
    rejections: int


class ImexStepper:
    """
    Implicit diffusion, explicit reaction for

        u_t = ε²Δu - u + u²/v,    τ v_t = DΔv - v + u².

    The inhibitor's linear decay is kept with its diffusion in one Helmholtz solve; for τ = 0 that solve is
    the quasi-steady problem DΔv - v = -u² at every step. LU factorizations are cached per time step.
    """

    def __init__(
        self,
        grid: SimGrid,
        include_reaction: bool = True,
        positivity_floor: float = DEFAULT_POSITIVITY_FLOOR,
        max_halvings: int = MAX_STEP_HALVINGS,
    ):
        self.grid = grid
        self.include_reaction = include_reaction
        self.positivity_floor = positivity_floor
        self.max_halvings = max_halvings
        self._mass_matrix = sparse.diags(grid.cell_areas)
        self._factorizations: Dict[Tuple, object] = {}
        self.last_diagnostics = None

    def _factorized(self, key: Tuple, build):
        if key not in self._factorizations:
            matrix = build()
            self._factorizations[key] = (matrix, splu(matrix))
            logger.trace(f"Factorized {key[0]} operator for {key[1:]}")
        return self._factorizations[key]

    def _solve(self, key: Tuple, build, rhs: np.ndarray) -> np.ndarray:
        matrix, factorization = self._factorized(key, build)
        solution = factorization.solve(rhs)
        residual = float(np.linalg.norm(matrix @ solution - rhs) / max(np.linalg.norm(rhs), np.finfo(float).tiny))
        if not np.isfinite(residual) or residual > LINEAR_SOLVE_RELATIVE_TOLERANCE:
            raise StepFailureError(f"{key[0]} solve left relative residual {residual:.3e}", residual=residual)
        return solution

    def _activator_operator(self, diffusion: float):
        return lambda: (self._mass_matrix - diffusion * self.grid.stiffness).tocsc()

    def _inhibitor_operator(self, dt: float, diffusivity: float, tau: float):
        if tau == 0:
            return lambda: (self._mass_matrix - diffusivity * self.grid.stiffness).tocsc()
        return lambda: ((tau + dt) * self._mass_matrix - dt * diffusivity * self.grid.stiffness).tocsc()

    def _single_step(self, state: SimState, dt: float) -> SimState:
        areas = self.grid.cell_areas
        u, v = state.u, state.v

        activator_rhs = u + dt * (-u + u**2 / v) if self.include_reaction else u
        diffusion = dt * state.epsilon**2
        u_next = self._solve(("activator", diffusion), self._activator_operator(diffusion), areas * activator_rhs)

        if not self.include_reaction:
            return state.advanced(u_next, v, dt)

        inhibitor_key = ("inhibitor", dt if state.tau > 0 else 0.0, state.diffusivity, state.tau)
        if state.tau == 0:
            inhibitor_rhs = areas * u_next**2
        else:
            inhibitor_rhs = areas * (state.tau * v + dt * u_next**2)
        v_next = self._solve(inhibitor_key, self._inhibitor_operator(dt, state.diffusivity, state.tau), inhibitor_rhs)
        return state.advanced(u_next, v_next, dt)

    def _is_admissible(self, state: SimState) -> bool:
        if not (np.all(np.isfinite(state.u)) and np.all(np.isfinite(state.v))):
            return False
        floor = self.positivity_floor * max(state.max_u, 0.0)
        if state.min_u < -floor:
            return False
        return not self.include_reaction or float(np.min(state.v)) > 0

    def step(self, state: SimState, dt: float) -> SimState:
        """
        Advance by dt. A step leaving u below -floor * max u (or v <= 0) is rejected and the interval is retried
        with twice as many substeps, at most `max_halvings` times.
        """
        if dt <= 0:
            raise PreconditionError(f"dt must be positive, got {dt}")

        for halvings in range(self.max_halvings + 1):
            substeps = 2**halvings
            substep_dt = dt / substeps
            candidate = state
            for _ in range(substeps):
                candidate = self._single_step(candidate, substep_dt)
                if not self._is_admissible(candidate):
                    break
            else:
                candidate = SimState(
                    u=candidate.u,
                    v=candidate.v,
                    t=state.t + dt,
                    epsilon=state.epsilon,
                    diffusivity=state.diffusivity,
                    tau=state.tau,
                )
                self.last_diagnostics = StepDiagnostics(
                    mass=self.grid.integrate(candidate.u),
                    min_u=candidate.min_u,
                    min_v=float(np.min(candidate.v)),
                    substeps=substeps,
                    rejections=halvings,
                )
                if halvings:
                    logger.debug(f"Step at t={state.t:.4f} accepted after {halvings} halving(s) of dt={dt}")
                return candidate
            logger.debug(f"Rejected step at t={state.t:.4f} with dt={substep_dt:.3e}: positivity lost")

        raise StepFailureError(
            f"Step at t={state.t:.4f} rejected {self.max_halvings} times, positivity could not be kept",
            rejections=self.max_halvings,
        )


def step(state: SimState, dt: float, grid: SimGrid, stepper: ImexStepper = None) -> SimState:
    """One IMEX step of dt; pass a stepper to reuse its cached factorizations across calls."""
    if stepper is None:
        stepper = ImexStepper(grid)
    return stepper.step(state, dt)


def steady_state_residuals(state: SimState, grid: SimGrid) -> Tuple[float, float]:
    """
    Max-norm residuals of ε²Δu - u + u²/v and DΔv - v + u², each relative to max u.
    """
    scale = max(state.max_u, np.finfo(float).tiny)
    activator = state.epsilon**2 * grid.apply_laplacian(state.u) - state.u + state.u**2 / state.v
    inhibitor = state.diffusivity * grid.apply_laplacian(state.v) - state.v + state.u**2
    return float(np.max(np.abs(activator)) / scale), float(np.max(np.abs(inhibitor)) / scale)
