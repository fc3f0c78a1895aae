import logging
from typing import Iterable, List, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, eig, solve_banded

from gmcluster.core_processes.nlep_solver.nlep_models import NlepDiscretization, TauSweep
from gmcluster.core_processes.nlep_solver.nlep_operator import assemble_nlep, local_bands, nonlocal_rank_one
from gmcluster.system.exceptions import ContinuationDivergenceError, EigenSolverError, PreconditionError

logger = logging.getLogger(__name__)

MAX_FIXED_POINT_ITERATIONS = 200
FIXED_POINT_RELAXATION = 0.5
FIXED_POINT_TOLERANCE = 1e-10
CONTINUATION_STEPS = 10
TRACKED_BRANCHES = 3
MAX_RAYLEIGH_ITERATIONS = 8
SELF_CONSISTENT_CANDIDATES = 24
DUPLICATE_TOLERANCE = 1e-8


def sort_by_real_part_descending(eigenvalues: np.ndarray) -> np.ndarray:
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    return eigenvalues[np.lexsort((-eigenvalues.imag, -eigenvalues.real))]


def _dense_eigen(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    try:
        eigenvalues, eigenvectors = eig(matrix)
    except LinAlgError as error:
        raise EigenSolverError(f"Dense eigen-solve failed: {error}") from error
    if not np.all(np.isfinite(eigenvalues)):
        raise EigenSolverError("Dense eigen-solve returned non-finite eigenvalues")
    return eigenvalues, eigenvectors


class _BandedRankOneOperator:
    """T + c · left ⊗ right with T tridiagonal; shifted solves by banded LU and Sherman-Morrison."""

    def __init__(self, grid: NlepDiscretization):
        self.lower, self.diagonal, self.upper = local_bands(grid.mode, grid)
        self.left, self.right = nonlocal_rank_one(grid)

    def matvec(self, vector: np.ndarray, coefficient: complex) -> np.ndarray:
        product = self.diagonal * vector
        product[1:] += self.lower * vector[:-1]
        product[:-1] += self.upper * vector[1:]
        return product + coefficient * self.left * (self.right @ vector)

    def shifted_solve(self, rhs: np.ndarray, coefficient: complex, shift: complex) -> np.ndarray:
        bands = np.zeros((3, self.diagonal.size), dtype=complex)
        bands[0, 1:] = self.upper
        bands[1] = self.diagonal - shift
        bands[2, :-1] = self.lower
        base_solution = solve_banded((1, 1), bands, rhs.astype(complex))
        correction = solve_banded((1, 1), bands, coefficient * self.left.astype(complex))
        return base_solution - correction * (self.right @ base_solution) / (1.0 + self.right @ correction)

    def nearest_eigenpair(
        self, coefficient: complex, shift: complex, vector: np.ndarray
    ) -> Tuple[complex, np.ndarray]:
        """Rayleigh quotient iteration from `shift`."""
        vector = vector.astype(complex)
        for _ in range(MAX_RAYLEIGH_ITERATIONS):
            try:
                solution = self.shifted_solve(vector, coefficient, shift)
            except (LinAlgError, ValueError):
                break
            if not np.all(np.isfinite(solution)):
                break
            vector = solution / np.linalg.norm(solution)
            updated = np.vdot(vector, self.matvec(vector, coefficient)) / np.vdot(vector, vector)
            converged = abs(updated - shift) <= 1e-14 * max(1.0, abs(shift))
            shift = updated
            if converged:
                break
        return complex(shift), vector


def _fixed_point_branch(
    operator: _BandedRankOneOperator,
    grid: NlepDiscretization,
    tau: float,
    eigenvalue: complex,
    eigenvector: np.ndarray,
) -> Tuple[complex, np.ndarray]:
    """λ = eig(T + γ/(1 + τλ) R) near the current λ, under-relaxed."""
    for iteration in range(MAX_FIXED_POINT_ITERATIONS):
        denominator = 1.0 + tau * eigenvalue
        if abs(denominator) < 1e-12:
            raise ContinuationDivergenceError(
                f"Coefficient γ/(1+τλ) blew up at τ={tau}", last_stable_eigenvalue=eigenvalue, last_stable_tau=tau
            )
        coefficient = grid.gamma / denominator
        updated, eigenvector = operator.nearest_eigenpair(coefficient, eigenvalue, eigenvector)
        if abs(updated - eigenvalue) <= FIXED_POINT_TOLERANCE * max(1.0, abs(eigenvalue)):
            logger.trace(f"τ={tau:.4f}: branch settled at λ={updated:.8f} after {iteration + 1} iterations")
            return updated, eigenvector
        eigenvalue = (1.0 - FIXED_POINT_RELAXATION) * eigenvalue + FIXED_POINT_RELAXATION * updated
    raise ContinuationDivergenceError(
        f"Fixed point in γ/(1+τλ) did not settle at τ={tau}", last_stable_eigenvalue=eigenvalue, last_stable_tau=tau
    )


def _continue_branches(grid: NlepDiscretization, taus: Iterable[float]) -> Tuple[List[np.ndarray], List[str]]:
    """
    Follow the TRACKED_BRANCHES eigenvalues of largest real part at τ = 0 through increasing τ.

    A subdominant branch whose fixed point stops settling is dropped with a warning; only the dominant branch
    raises. Returns, per τ, the surviving tracked eigenvalues, plus the warnings.
    """
    eigenvalues, eigenvectors = _dense_eigen(assemble_nlep(grid.with_tau(0.0)))
    leading = np.argsort(-eigenvalues.real)[:TRACKED_BRANCHES]
    branches = [(complex(eigenvalues[index]), eigenvectors[:, index]) for index in leading]

    operator = _BandedRankOneOperator(grid)
    history = []
    warnings = []
    last_stable = (complex(eigenvalues[leading[0]]), 0.0)
    for tau in taus:
        if tau > 0:
            dominant_index = int(np.argmax([eigenvalue.real for eigenvalue, _ in branches]))
            updated_branches = []
            for index, (eigenvalue, eigenvector) in enumerate(branches):
                try:
                    updated_branches.append(_fixed_point_branch(operator, grid, tau, eigenvalue, eigenvector))
                except ContinuationDivergenceError as error:
                    if index == dominant_index:
                        raise ContinuationDivergenceError(
                            f"{error} (last converged τ={last_stable[1]:.6g})",
                            last_stable_eigenvalue=last_stable[0],
                            last_stable_tau=last_stable[1],
                        ) from error
                    warnings.append(f"dropped subdominant branch λ={eigenvalue:.6f} at τ={tau:.6g}: {error}")
                    logger.warning(f"NLEP continuation: {warnings[-1]}")
            branches = updated_branches
        tracked = np.array([eigenvalue for eigenvalue, _ in branches])
        history.append(tracked)
        last_stable = (complex(tracked[np.argmax(tracked.real)]), float(tau))
    return history, warnings


def _self_consistent_spectrum(grid: NlepDiscretization, tau: float, dominant: complex) -> np.ndarray:
    """
    Refine the leading eigenvalues of the linear problem at the dominant coefficient into solutions of
    λ ∈ spec(T + γ/(1+τλ) R), each with its own λ; candidates that do not settle are left out.
    """
    eigenvalues, eigenvectors = _dense_eigen(assemble_nlep(grid, coefficient=grid.gamma / (1.0 + tau * dominant)))
    operator = _BandedRankOneOperator(grid)
    solutions = [complex(dominant)]
    for index in np.lexsort((-eigenvalues.imag, -eigenvalues.real))[:SELF_CONSISTENT_CANDIDATES]:
        try:
            solution, _ = _fixed_point_branch(operator, grid, tau, complex(eigenvalues[index]), eigenvectors[:, index])
        except ContinuationDivergenceError as error:
            logger.debug(f"τ={tau}: candidate λ={eigenvalues[index]:.6f} left out, {error}")
            continue
        if min(abs(solution - known) for known in solutions) > DUPLICATE_TOLERANCE * max(1.0, abs(solution)):
            solutions.append(solution)
    return sort_by_real_part_descending(np.array(solutions))


def solve_nlep(tau: float, grid: NlepDiscretization) -> np.ndarray:
    """
    Eigenvalues of L0 φ - γ/(1+τλ) (∫wφ / ∫w²) w² = λ φ for the grid's angular mode, sorted by real part descending.

    For τ > 0 the problem is nonlinear in λ: the dominant eigenvalue comes from continuation in τ, and every
    returned value satisfies λ ∈ spec(T + γ/(1+τλ) R) with its own coefficient. Only the leading
    SELF_CONSISTENT_CANDIDATES are attempted, so the list is shorter than the τ = 0 spectrum.
    """
    if tau < 0:
        raise PreconditionError(f"τ must be >= 0, got {tau}")
    if tau == 0 or not grid.nonlocal_active:
        eigenvalues, _ = _dense_eigen(assemble_nlep(grid))
        return sort_by_real_part_descending(eigenvalues)

    taus = np.linspace(0.0, tau, CONTINUATION_STEPS + 1)
    history, _ = _continue_branches(grid, taus)
    tracked = history[-1]
    dominant = complex(tracked[np.argmax(tracked.real)])
    logger.debug(f"NLEP at τ={tau}: dominant tracked λ={dominant:.8f}")
    return _self_consistent_spectrum(grid, tau, dominant)


def tau_sweep(tau_max: float, steps: int, grid: NlepDiscretization) -> TauSweep:
    """Dominant Re λ on a uniform τ grid from 0 to tau_max and the first τ where it crosses zero."""
    if tau_max <= 0:
        raise PreconditionError(f"tau_max must be > 0, got {tau_max}")
    if steps < 1:
        raise PreconditionError(f"steps must be >= 1, got {steps}")

    taus = np.linspace(0.0, tau_max, steps + 1)
    if grid.nonlocal_active:
        history, continuation_warnings = _continue_branches(grid, taus)
        dominant = [tracked[np.argmax(tracked.real)] for tracked in history]
    else:
        dominant, continuation_warnings = [solve_nlep(0.0, grid)[0]] * taus.size, []
    dominant = np.array(dominant, dtype=complex)

    first_crossing_tau = None
    for index in range(1, taus.size):
        before, after = dominant[index - 1].real, dominant[index].real
        if before < 0 <= after:
            first_crossing_tau = float(taus[index - 1] + (taus[index] - taus[index - 1]) * (-before) / (after - before))
            logger.info(f"Dominant NLEP eigenvalue crosses zero near τ={first_crossing_tau:.6f}")
            break

    table = pd.DataFrame({"tau": taus, "max_re_lambda": dominant.real, "im_lambda": dominant.imag})
    warnings = list(grid.warnings) + continuation_warnings
    return TauSweep(table=table, first_crossing_tau=first_crossing_tau, warnings=warnings)


def mode_table(grid: NlepDiscretization, modes: Iterable[int] = (0, 1, 2, 3), count: int = 10) -> pd.DataFrame:
    """Leading `count` eigenvalues per angular mode at the grid's τ, as rows (m, re_lambda, im_lambda)."""
    rows = []
    for mode in modes:
        eigenvalues = solve_nlep(grid.tau, grid.with_mode(mode))[:count]
        rows.extend({"m": mode, "re_lambda": value.real, "im_lambda": value.imag} for value in eigenvalues)
    return pd.DataFrame(rows, columns=["m", "re_lambda", "im_lambda"])
