"""Continuation in ``alpha`` for hard supercritical instances.

The stochastic solution ``s_alpha`` is followed from ``alpha = 0.6`` up to
the target value. Each stage is solved by Newton (method N) or
Perron-Newton, started from a prediction built from earlier stages.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equation import eval_G_jacobian
from .errors import InputError, SingularJacobianError, SubcriticalError
from .minimal import newton_stochastic
from .perron import perron_newton
from .report import SolverOptions, Status
from ._linalg import lu_solve_checked
from .tensor import apply_bilinear, left_contraction, right_contraction

ALPHA_START = 0.6
FIRST_STEP = 0.01
MIN_STEP = 1e-6
MAX_HALVINGS = 8
STAGE_SUM_TOL = 1e-8


class PredictorKind(enum.Enum):
    T2 = "t2"
    T1 = "t1"
    EXT = "ext"
    IMP = "imp"


class InnerSolver(enum.Enum):
    NEWTON = "n"
    PERRON_NEWTON = "pn"


@dataclass(frozen=True)
class StageRecord:
    alpha: float
    s: np.ndarray
    predictor: Optional[PredictorKind]
    inner_iterations: int
    inner_status: Status


@dataclass
class ContinuationTrace:
    """Accepted stages plus the bookkeeping of rejected attempts.

    ``total_inner_iterations`` sums the iterations of every inner solve,
    rejected ones included.
    """

    records: list = field(default_factory=list)
    failed_attempts: list = field(default_factory=list)
    total_inner_iterations: int = 0

    @property
    def alphas(self):
        return [r.alpha for r in self.records]

    def __len__(self):
        return len(self.records)


def _I_minus_jacobian(p, s):
    return np.eye(p.n) - eval_G_jacobian(p, s)


def first_derivative(p, s):
    """``ds/dalpha = (I - G'_s)^{-1} (R(s ⊗ s) - v)`` at a solution ``s`` for ``p.alpha``."""
    s = np.asarray(s, dtype=float)
    return lu_solve_checked(_I_minus_jacobian(p, s), apply_bilinear(p.R, s, s) - p.v)


def second_derivative(p, s, s1=None):
    """``d2s/dalpha2 = (I - G'_s)^{-1} (R(t ⊗ s1) + R(s1 ⊗ t))`` with ``t = 2 s + alpha s1``."""
    s = np.asarray(s, dtype=float)
    if s1 is None:
        s1 = first_derivative(p, s)
    t = 2.0 * s + p.alpha * s1
    rhs = apply_bilinear(p.R, t, s1) + apply_bilinear(p.R, s1, t)
    return lu_solve_checked(_I_minus_jacobian(p, s), rhs)


def _record_parts(rec):
    if isinstance(rec, StageRecord):
        return rec.alpha, rec.s
    return rec


def predict(kind, history, alpha_next, p):
    """Starting guess for ``alpha_next`` from the solved stages in ``history``.

    ``history`` is a sequence of ``StageRecord`` or ``(alpha, s)`` pairs,
    oldest first. ``p`` supplies ``R`` and ``v``; its own alpha is ignored.
    """
    kind = PredictorKind(kind)
    needed = 2 if kind is PredictorKind.EXT else 1
    if len(history) < needed:
        raise InputError(f"{kind.name} needs {needed} solved stage(s), got {len(history)}")
    a_h, s_h = _record_parts(history[-1])
    s_h = np.asarray(s_h, dtype=float)
    delta = alpha_next - a_h
    p_h = p.with_alpha(a_h)

    if kind is PredictorKind.T1:
        return s_h + delta * first_derivative(p_h, s_h)
    if kind is PredictorKind.T2:
        s1 = first_derivative(p_h, s_h)
        s2 = second_derivative(p_h, s_h, s1)
        return s_h + delta * s1 + 0.5 * delta ** 2 * s2
    if kind is PredictorKind.EXT:
        a_prev, s_prev = _record_parts(history[-2])
        return s_h + (s_h - np.asarray(s_prev)) / (a_h - a_prev) * delta
    # IMP: first-derivative formula with the new alpha and the old solution.
    A = np.eye(p.n) - alpha_next * (left_contraction(p.R, s_h) + right_contraction(p.R, s_h))
    return s_h + delta * lu_solve_checked(A, apply_bilinear(p.R, s_h, s_h) - p.v)


def select_step(tau, alpha_h, alpha_prev, s_h, s_prev, alpha_target):
    """Next ``alpha`` aiming at a change of ``tau`` (1-norm) in the solution.

    Assumes ``||s_{h+1} - s_h|| / (alpha_{h+1} - alpha_h)**2`` stays about
    constant from one stage to the next.
    """
    change = float(np.abs(np.asarray(s_h) - np.asarray(s_prev)).sum())
    if change < 1e-14:
        return alpha_target
    nxt = alpha_h + math.sqrt(tau * (alpha_h - alpha_prev) ** 2 / change)
    return min(alpha_target, nxt)


def _safe_predict(kind, records, alpha_next, p):
    """Prediction with fallbacks: EXT without two stages and a singular IMP use T1;
    a singular T1/T2 solve falls back to the last solution."""
    kind = PredictorKind(kind)
    if kind is PredictorKind.EXT and len(records) < 2:
        kind = PredictorKind.T1
    try:
        return predict(kind, records, alpha_next, p), kind
    except SingularJacobianError:
        if kind is PredictorKind.IMP:
            return _safe_predict(PredictorKind.T1, records, alpha_next, p)
        return np.array(records[-1].s), None


def _inner_solve(inner, p, guess, opts):
    if inner is InnerSolver.NEWTON:
        return newton_stochastic(p, guess, opts)
    return perron_newton(p, guess, opts)


def _stage_ok(rep):
    return rep.converged and abs(rep.sum - 1.0) <= STAGE_SUM_TOL


def continuation_solve(p, kind=PredictorKind.T1, inner=InnerSolver.PERRON_NEWTON,
                       tau=0.01, opts=None):
    """Solve ``p`` by continuation from ``alpha = 0.6``.

    Returns ``(report, trace)`` where ``report`` is the inner solve at the
    target ``p.alpha``. When an inner solve fails, the step from the last
    accepted stage is halved and retried, at most 8 times.
    """
    kind = PredictorKind(kind)
    inner = InnerSolver(inner)
    opts = opts or SolverOptions()
    target = p.alpha
    if target <= ALPHA_START:
        raise SubcriticalError(f"continuation starts at alpha = {ALPHA_START}; "
                               f"target must exceed it, got {target:g}")
    trace = ContinuationTrace()

    rep = _inner_solve(inner, p.with_alpha(ALPHA_START), p.v, opts)
    trace.total_inner_iterations += rep.total_iterations
    if not _stage_ok(rep):
        trace.failed_attempts.append((ALPHA_START, rep.status, rep.total_iterations))
        return rep, trace
    trace.records.append(StageRecord(ALPHA_START, rep.x, None, rep.total_iterations, rep.status))
    alpha_next = min(target, ALPHA_START + FIRST_STEP)

    while trace.records[-1].alpha < target:
        last = trace.records[-1]
        step = max(alpha_next - last.alpha, MIN_STEP)
        for _ in range(MAX_HALVINGS + 1):
            a = min(target, last.alpha + step)
            guess, used = _safe_predict(kind, trace.records, a, p)
            rep = _inner_solve(inner, p.with_alpha(a), guess, opts)
            trace.total_inner_iterations += rep.total_iterations
            if _stage_ok(rep):
                break
            trace.failed_attempts.append((a, rep.status, rep.total_iterations))
            step /= 2.0
            if step < MIN_STEP:
                break
        else:
            return rep, trace
        if not _stage_ok(rep):
            return rep, trace
        trace.records.append(StageRecord(a, rep.x, used, rep.total_iterations, rep.status))
        prev = trace.records[-2]
        alpha_next = select_step(tau, a, prev.alpha, rep.x, prev.s, target)
    return rep, trace
