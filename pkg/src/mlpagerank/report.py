"""Solver options and the report every solver returns."""

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equation import DEFAULT_TOL, classify, residual

SUM_MATCH_TOL = 1e-6


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER_EXCEEDED = "max_iter_exceeded"
    SINGULAR_JACOBIAN = "singular_jacobian"
    NUMERICAL_BREAKDOWN = "numerical_breakdown"


@dataclass(frozen=True)
class SolverOptions:
    tol: float = DEFAULT_TOL
    max_iter: int = 10_000
    record_history: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")


@dataclass
class SolveReport:
    """Outcome of one solve.

    ``iterations`` counts steps of the main loop. ``setup_iterations`` holds
    work done before it (the Newton steps spent on the minimal solution by
    the Perron-based methods); ``total_iterations`` is the sum, which is the
    figure reported by the benchmark harness.
    """

    x: np.ndarray
    status: Status
    iterations: int
    residual: float
    residual_history: Optional[list] = None
    setup_iterations: int = 0
    message: str = ""
    sum: float = field(init=False)
    classification: Optional[str] = field(init=False)

    def __post_init__(self):
        self.sum = float(np.sum(self.x))

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    @property
    def total_iterations(self):
        return self.iterations + self.setup_iterations


def make_report(p, x, status, iterations, history=None, **kw):
    """Build a report for ``x``, filling residual, sum and its classification."""
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        res = residual(p, x).value if np.all(np.isfinite(x)) else float("inf")
    rep = SolveReport(x=x, status=status, iterations=iterations, residual=res,
                      residual_history=history, **kw)
    crit = classify(p.alpha)
    if abs(rep.sum - crit.stochastic_sum) <= SUM_MATCH_TOL:
        rep.classification = "stochastic"
    elif abs(rep.sum - crit.minimal_sum) <= SUM_MATCH_TOL:
        rep.classification = "minimal"
    else:
        rep.classification = None
    return rep
