"""Iterations for the minimal solution and the normalized baselines F and N.

All loops share one stopping rule, ``||G(x) - x||_1 <= tol``, checked
before each step, so a starting point that already solves the equation
costs zero iterations.
"""

import numpy as np

from .equation import eval_G, eval_G_jacobian, residual
from .errors import InputError, NumericalBreakdown, SingularJacobianError
from .report import SolverOptions, Status, make_report
from ._linalg import lu_solve_checked
from .tensor import apply_bilinear

DIVERGENCE_SUM = 1e12


def run_iteration(p, x0, step, opts, callback=None, **report_kw):
    """Drive ``x <- step(x)`` until the residual test passes.

    ``step`` may raise :class:`SingularJacobianError` or
    :class:`NumericalBreakdown`; both end the run with the matching status.
    ``callback(k, x)`` sees every iterate, including ``x0`` as ``k = 0``.
    """
    opts = opts or SolverOptions()
    x = np.array(x0, dtype=float)
    history = [] if opts.record_history else None
    if callback is not None:
        callback(0, x)
    r = residual(p, x).value
    for k in range(opts.max_iter):
        if r <= opts.tol:
            return make_report(p, x, Status.CONVERGED, k, history, **report_kw)
        try:
            x = step(x)
        except SingularJacobianError as exc:
            return make_report(p, x, Status.SINGULAR_JACOBIAN, k, history,
                               message=str(exc), **report_kw)
        except NumericalBreakdown as exc:
            if exc.iterate is not None:
                x = exc.iterate
            return make_report(p, x, Status.NUMERICAL_BREAKDOWN, k + 1, history,
                               message=str(exc), **report_kw)
        if callback is not None:
            callback(k + 1, x)
        r = residual(p, x).value
        if not np.isfinite(r):
            return make_report(p, x, Status.NUMERICAL_BREAKDOWN, k + 1, history,
                               message="non-finite residual", **report_kw)
        if history is not None:
            history.append(r)
    status = Status.CONVERGED if r <= opts.tol else Status.MAX_ITER_EXCEEDED
    return make_report(p, x, status, opts.max_iter, history, **report_kw)


def _newton_target(p, x):
    """Solve ``(I - G'_x) x_new = (1 - alpha) v - alpha R(x ⊗ x)``."""
    A = np.eye(p.n) - eval_G_jacobian(p, x)
    b = (1.0 - p.alpha) * p.v - p.alpha * apply_bilinear(p.R, x, x)
    return lu_solve_checked(A, b)


def _to_simplex(x):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    s = x.sum()
    if not s > 0 or not np.isfinite(s):
        raise NumericalBreakdown("iterate has no positive mass to normalize")
    return x / s


def fixed_point_minimal(p, opts=None, callback=None):
    """``x_{k+1} = G(x_k)`` from ``x_0 = 0``.

    The iterates increase monotonically to the minimal nonnegative solution.
    Convergence is linear and slows down as ``alpha`` approaches 1/2.
    """
    return run_iteration(p, np.zeros(p.n), lambda x: eval_G(p, x), opts, callback)


def fixed_point_stochastic(p, x0=None, opts=None, normalize=True, callback=None):
    """Fixed-point iteration from a nonnegative ``x0`` (default ``v``).

    With ``normalize`` each iterate is rescaled to sum 1 (method F). Without
    it the raw iteration runs, and the sum ``z_k`` follows
    ``z_{k+1} = g(z_k)``; sums above 1e12 are reported as divergence.
    """
    x0 = p.v if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (p.n,) or np.any(x0 < 0) or not x0.sum() > 0:
        raise InputError("x0 must be nonnegative with positive sum")

    if normalize:
        x0 = x0 / x0.sum()

        def step(x):
            return _to_simplex(eval_G(p, x))
    else:
        def step(x):
            x = eval_G(p, x)
            if not x.sum() <= DIVERGENCE_SUM:
                raise NumericalBreakdown(
                    f"sum of iterate exceeded {DIVERGENCE_SUM:g}", iterate=x)
            return x

    return run_iteration(p, x0, step, opts, callback)


def newton_minimal(p, opts=None, callback=None):
    """Newton's method for ``x = G(x)`` started at ``x_0 = 0``.

    When ``G'_m`` is irreducible the iterates increase monotonically to the
    minimal solution ``m``; in the supercritical regime ``sum(m)`` equals
    ``(1 - alpha) / alpha``.
    """
    return run_iteration(p, np.zeros(p.n), lambda x: _newton_target(p, x), opts, callback)


def newton_stochastic(p, x0=None, opts=None, callback=None):
    """Newton's method with projection to the simplex after every step (method N).

    Each step takes the Newton update at the current iterate, clamps
    negative entries to zero and rescales to sum 1.
    """
    x0 = p.v if x0 is None else x0
    x0 = _to_simplex(x0)
    return run_iteration(p, x0, lambda x: _to_simplex(_newton_target(p, x)), opts, callback)
