import logging
from typing import Optional, Tuple

import numpy as np

from gmcluster.system.exceptions import EigenSolverError

logger = logging.getLogger(__name__)

MAX_QL_ITERATIONS_PER_EIGENVALUE = 60


def _sign(magnitude: float, sign_source: float) -> float:
    return abs(magnitude) if sign_source >= 0 else -abs(magnitude)


def tridiagonal_ql_implicit(
    diagonal: np.ndarray,
    off_diagonal: np.ndarray,
    compute_eigenvectors: bool = True,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Eigen-decomposition of a real symmetric tridiagonal matrix by the QL algorithm with implicit shifts.

    Returns the eigenvalues in ascending order and, optionally, the matching orthonormal eigenvectors as columns.
    """
    d = np.array(diagonal, dtype=float)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = off_diagonal
    z = np.eye(n) if compute_eigenvectors else None
    epsilon = np.finfo(float).eps

    for l in range(n):  # noqa: E741
        iterations = 0
        while True:
            for m in range(l, n - 1):
                scale = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= epsilon * scale:
                    break
            else:
                m = n - 1
            if m == l:
                break
            if iterations == MAX_QL_ITERATIONS_PER_EIGENVALUE:
                raise EigenSolverError(f"QL iteration did not converge for eigenvalue {l} of {n}")
            iterations += 1

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + _sign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    column = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * column
                    z[:, i] = c * z[:, i] - s * column
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
        logger.trace(f"QL eigenvalue {l} settled after {iterations} sweeps")

    order = np.argsort(d)
    return d[order], (z[:, order] if z is not None else None)
