"""Perron-based solvers for a stochastic solution in the supercritical regime.

Every solution ``s`` dominates the minimal solution ``m``. Writing
``s = m + y`` turns the equation into ``y = P_y y`` with

    P_y = alpha R(y ⊗ I) + G'_m,

and ``P_y`` is column stochastic as soon as ``sum(y) = (2 alpha - 1) / alpha``.
A stochastic solution is then a scaled Perron vector of ``P_y``, which gives
a fixed-point iteration on ``y`` and a Newton method on
``H(y) = y - (2 alpha - 1) / alpha * PV(P_y)``.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.csgraph import connected_components

from .equation import eval_G_jacobian
from .errors import (InputError, MlprError, NumericalBreakdown,
                     ReducibleMatrixError, SubcriticalError)
from .minimal import newton_minimal, run_iteration
from .report import SolverOptions, make_report
from ._linalg import gth_stationary, lu_solve_checked
from .tensor import left_contraction, right_contraction

STOCHASTIC_TOL = 1e-10
POWER_TOL = 1e-13
POWER_MAX_SWEEPS = 10_000
# m is computed this much tighter than the outer tolerance: errors in m put a
# floor under the residual that x = m + y can reach.
DEFLATION_TOL_FACTOR = 1e-3


class DeflationFailed(MlprError):
    """The minimal solution could not be computed; ``report`` says why."""

    def __init__(self, report):
        super().__init__(f"minimal solution failed: {report.status.value} {report.message}".strip())
        self.report = report


@dataclass(frozen=True, eq=False)
class DeflationContext:
    """Minimal solution ``m`` and the data derived from it for one problem."""

    problem: object
    m: np.ndarray
    Gm: np.ndarray
    newton_iterations: int

    @property
    def alpha(self):
        return self.problem.alpha

    @property
    def target_sum(self):
        """Required sum of ``y = s - m``: ``(2 alpha - 1) / alpha``."""
        return (2.0 * self.alpha - 1.0) / self.alpha


def deflate(p, opts=None):
    """Compute ``m`` with Newton's method and cache ``G'_m``.

    ``m`` is converged to ``DEFLATION_TOL_FACTOR * opts.tol``.
    """
    if p.alpha <= 0.5:
        raise SubcriticalError(
            f"alpha = {p.alpha:g} is subcritical; the Perron-based methods "
            "need the supercritical case alpha > 1/2")
    opts = opts or SolverOptions()
    rep = newton_minimal(p, replace(opts, tol=opts.tol * DEFLATION_TOL_FACTOR,
                                    record_history=False))
    if not rep.converged:
        raise DeflationFailed(rep)
    m = rep.x.copy()
    m.setflags(write=False)
    Gm = eval_G_jacobian(p, m)
    Gm.setflags(write=False)
    return DeflationContext(p, m, Gm, rep.iterations)


def build_P(ctx, y):
    """``P_y = alpha R(y ⊗ I) + G'_m``."""
    return ctx.alpha * left_contraction(ctx.problem.R, y) + ctx.Gm


def _check_irreducible(A):
    ncomp, _ = connected_components(A != 0, directed=True, connection="strong")
    if ncomp > 1:
        raise ReducibleMatrixError(
            f"matrix pattern splits into {ncomp} strongly connected components; "
            "reduce the problem by removing states where the minimal solution vanishes")


def _power_iteration(A):
    n = A.shape[0]
    # A positive diagonal makes an irreducible matrix primitive.
    shift = 0.0 if np.any(np.diag(A) > 0) else A.sum() / n
    B = A + shift * np.eye(n)
    w = np.full(n, 1.0 / n)
    for _ in range(POWER_MAX_SWEEPS):
        z = B @ w
        z /= z.sum()
        if np.abs(z - w).sum() <= POWER_TOL:
            return z
        w = z
    raise NumericalBreakdown(f"power iteration did not settle in {POWER_MAX_SWEEPS} sweeps")


def perron_vector(A):
    """Perron vector and spectral radius of an irreducible ``A >= 0``.

    Returns ``(w, lam)`` with ``w > 0``, ``sum(w) = 1`` and ``A w = lam w``.
    Column-stochastic input (the case inside the solvers) goes through GTH
    elimination; anything else through shifted power iteration.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)) or np.any(A < 0):
        raise InputError("matrix must be finite and nonnegative")
    _check_irreducible(A)
    if np.all(np.abs(A.sum(axis=0) - 1.0) <= STOCHASTIC_TOL):
        w = gth_stationary(A)
    else:
        w = _power_iteration(A)
    if not np.all(w > 0):
        raise NumericalBreakdown("Perron vector lost positivity")
    return w, float((A @ w).sum())


def _normalized_start(ctx, x0):
    x0 = ctx.problem.v if x0 is None else np.asarray(x0, dtype=float)
    x0 = np.maximum(x0, 0.0)
    if not x0.sum() > 0:
        raise InputError("initial guess has no positive entries")
    x0 = x0 / x0.sum()
    y = np.maximum(x0 - ctx.m, 0.0)
    if not y.sum() > 0:
        # x0 <= m entrywise cannot happen for sum(x0) = 1 > sum(m); guard anyway.
        y = np.ones_like(y)
    return ctx.target_sum * y / y.sum()


def unit_eigenvector(P):
    """Vector ``w`` with ``P w = w`` and ``sum(w) = 1`` for ``1' P = 1'``.

    Solves ``(I - P + u 1') w = u`` with ``u = 1/n``; no sign condition on ``P``.
    """
    n = P.shape[0]
    u = np.full(n, 1.0 / n)
    return lu_solve_checked(np.eye(n) - P + np.outer(u, np.ones(n)), u)


def _perron_of(ctx, y):
    P = build_P(ctx, y)
    if np.any(P < 0):
        # Only Perron-Newton gets here: its renormalization does not clamp, so
        # y may leave the cone. P still has unit column sums.
        return P, unit_eigenvector(P)
    try:
        w, _ = perron_vector(P)
    except ReducibleMatrixError as exc:
        raise NumericalBreakdown(str(exc)) from exc
    return P, w


def _prepare(p, x0, opts, ctx):
    """Shared set-up: either ``(ctx, y0)`` or a failure report."""
    if ctx is None:
        try:
            ctx = deflate(p, opts)
        except DeflationFailed as exc:
            rep = exc.report
            return None, make_report(p, rep.x, rep.status, 0,
                                     setup_iterations=rep.iterations, message=str(exc))
    return ctx, _normalized_start(ctx, x0)


def perron_iteration(p, x0=None, opts=None, ctx=None, callback=None):
    """Perron fixed-point iteration ``y <- (2 alpha - 1)/alpha * PV(P_y)``.

    ``x0`` defaults to ``v``. Pass ``ctx`` to reuse a minimal solution
    computed earlier; its Newton steps are still reported as setup work.
    """
    if p.alpha <= 0.5:
        raise SubcriticalError(f"alpha = {p.alpha:g}: the Perron iteration needs alpha > 1/2")
    ctx, y0 = _prepare(p, x0, opts, ctx)
    if ctx is None:
        return y0
    m, c = ctx.m, ctx.target_sum

    def step(x):
        _, w = _perron_of(ctx, x - m)
        return m + c * w

    return run_iteration(p, m + y0, step, opts, callback,
                         setup_iterations=ctx.newton_iterations)


def _solve_with_R_of_w(ctx, P, w):
    """``(I - P + w 1') \\ R(I ⊗ w)``."""
    n = len(w)
    M = np.eye(n) - P + np.outer(w, np.ones(n))
    return lu_solve_checked(M, right_contraction(ctx.problem.R, w))


def perron_vector_jacobian(ctx, y, w=None):
    """Jacobian of ``y -> PV(P_y)`` on the level set ``sum(y) = target_sum``.

    ``alpha ((I - P_y + w 1')^{-1} R(I ⊗ w) - w 1')``.
    """
    P = build_P(ctx, y)
    if w is None:
        w, _ = perron_vector(P)
    Z = _solve_with_R_of_w(ctx, P, w)
    return ctx.alpha * (Z - np.outer(w, np.ones(len(w))))


def perron_newton_jacobian(ctx, y, w=None, P=None):
    """``H'_y = I + (2a - 1) w 1' - (2a - 1) (I - P_y + w 1')^{-1} R(I ⊗ w)``.

    ``1' H'_y = 1'`` holds for every ``y``.
    """
    if P is None:
        P = build_P(ctx, y)
    if w is None:
        w, _ = perron_vector(P)
    n = len(w)
    k = 2.0 * ctx.alpha - 1.0
    Z = _solve_with_R_of_w(ctx, P, w)
    return np.eye(n) + k * np.outer(w, np.ones(n)) - k * Z


def perron_newton(p, x0=None, opts=None, ctx=None, callback=None, on_jacobian=None):
    """Newton's method on ``H(y) = y - (2 alpha - 1)/alpha * PV(P_y)``.

    After every step ``y`` is rescaled to sum ``(2 alpha - 1)/alpha``.
    ``on_jacobian(H)`` receives each ``H'_y`` that is formed.
    """
    if p.alpha <= 0.5:
        raise SubcriticalError(f"alpha = {p.alpha:g}: Perron-Newton needs alpha > 1/2")
    ctx, y0 = _prepare(p, x0, opts, ctx)
    if ctx is None:
        return y0
    m, c = ctx.m, ctx.target_sum

    def step(x):
        y = x - m
        P, w = _perron_of(ctx, y)
        H = perron_newton_jacobian(ctx, y, w, P)
        if on_jacobian is not None:
            on_jacobian(H)
        y = y - lu_solve_checked(H, y - c * w)
        s = y.sum()
        if not np.isfinite(s) or s == 0:
            raise NumericalBreakdown("Newton step produced a zero-sum update")
        return m + c * y / s

    return run_iteration(p, m + y0, step, opts, callback,
                         setup_iterations=ctx.newton_iterations)

