"""Small dense kernels: pivot-checked LU solves and GTH elimination."""

import numpy as np
import scipy.linalg

from .errors import SingularJacobianError

PIVOT_TOL = 1e-14


def lu_solve_checked(A, b):
    """Solve ``A x = b`` by LU with partial pivoting.

    Raises :class:`SingularJacobianError` when a pivot is below
    ``PIVOT_TOL * max|A|``.
    """
    A = np.asarray(A, dtype=float)
    scale = np.abs(A).max() if A.size else 0.0
    if scale == 0.0 or not np.all(np.isfinite(A)):
        raise SingularJacobianError("matrix is zero or non-finite")
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_TOL * scale:
        raise SingularJacobianError(
            f"pivot {pivots.min():.3e} below {PIVOT_TOL:g} x {scale:.3e}")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def gth_stationary(P):
    """Stationary vector of a column-stochastic irreducible matrix ``P``.

    Returns ``w >= 0`` with ``P w = w`` and ``sum(w) = 1``. Only the
    off-diagonal entries are used, and every elimination step divides by a
    sum of nonnegative numbers, so no cancellation occurs.
    """
    # Work with the row-stochastic transpose: pi Q = pi.
    Q = np.array(P, dtype=float).T
    n = Q.shape[0]
    for k in range(n - 1, 0, -1):
        s = Q[k, :k].sum()
        if s <= 0.0:
            raise ZeroDivisionError("state cannot leave its block; matrix is reducible")
        Q[:k, k] /= s
        Q[:k, :k] += np.outer(Q[:k, k], Q[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ Q[:k, k]
    return pi / pi.sum()
