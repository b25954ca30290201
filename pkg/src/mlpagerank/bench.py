"""Benchmark sweeps over instance sets and performance profiles.

Iteration counts follow one convention per method family:

* ``f``, ``n``, ``fs``, ``ns``: steps of the solver loop;
* ``p``, ``pn``: Newton steps spent on the minimal solution plus steps of
  the Perron loop;
* continuation methods (``n-t1``, ``pn-ext``, ...): inner iterations summed
  over every stage, rejected attempts included.
"""

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .continuation import continuation_solve
from .errors import MlprError
from .minimal import (fixed_point_minimal, fixed_point_stochastic, newton_minimal,
                      newton_stochastic)
from .perron import perron_iteration, perron_newton
from .report import SolverOptions
from .tensor import load_problem, random_problem

CSV_HEADER = ("problem", "alpha", "method", "status", "iterations", "residual", "wall_time_s")
PROFILE_GRID = 2.0 ** np.linspace(0.0, 6.0, 49)
DEFAULT_ALPHAS = (0.9, 0.99, 0.999)
DEFAULT_SIZES = (3, 4, 6)

_PLAIN = {
    "f": lambda p, x0, opts: fixed_point_stochastic(p, x0, opts),
    "fs": lambda p, x0, opts: fixed_point_minimal(p, opts),
    "n": lambda p, x0, opts: newton_stochastic(p, x0, opts),
    "ns": lambda p, x0, opts: newton_minimal(p, opts),
    "p": lambda p, x0, opts: perron_iteration(p, x0, opts),
    "pn": lambda p, x0, opts: perron_newton(p, x0, opts),
}
METHODS = tuple(_PLAIN) + tuple(
    f"{inner}-{kind}" for inner in ("n", "pn") for kind in ("t1", "t2", "ext", "imp"))
PERRON_METHODS = frozenset(m for m in METHODS if m.startswith("p"))


def solve_with(method, p, x0=None, opts=None, tau=0.01):
    """Run ``method`` on ``p``.

    Returns ``(report, iterations, trace)``; ``iterations`` is the count
    under the harness convention and ``trace`` is None except for
    continuation methods.
    """
    if method in _PLAIN:
        rep = _PLAIN[method](p, x0, opts)
        return rep, rep.total_iterations, None
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    inner, kind = method.split("-")
    rep, trace = continuation_solve(p, kind, inner, tau, opts)
    return rep, trace.total_inner_iterations, trace


@dataclass(frozen=True)
class BenchRecord:
    problem_id: str
    alpha: float
    method: str
    status: str
    iterations: float  # NaN on failure
    wall_time: float
    final_residual: float

    @property
    def converged(self):
        return self.status == "converged"

    def as_row(self):
        its = "" if math.isnan(self.iterations) else str(int(self.iterations))
        return (self.problem_id, repr(self.alpha), self.method, self.status, its,
                f"{self.final_residual:.6e}", f"{self.wall_time:.6e}")

    def sort_key(self):
        return (self.problem_id, self.alpha, METHODS.index(self.method)
                if self.method in METHODS else len(METHODS), self.method)


def run_cell(problem_id, p, method, opts, tau):
    """One (problem, alpha, method) cell; never raises."""
    t0 = time.perf_counter()
    try:
        rep, its, _ = solve_with(method, p, None, opts, tau)
        status, residual = rep.status.value, rep.residual
    except MlprError as exc:
        status, residual, its = f"error:{type(exc).__name__}", float("nan"), 0
    elapsed = time.perf_counter() - t0
    if status != "converged":
        its = float("nan")
    return BenchRecord(problem_id, p.alpha, method, status, float(its), elapsed, float(residual))


def _cell(args):
    return run_cell(*args)


def load_instances(directory, alpha=0.9):
    """``{stem: problem}`` for every ``.mlpr`` file in ``directory``, sorted by name."""
    paths = sorted(Path(directory).glob("*.mlpr"))
    return {path.stem: load_problem(path, alpha) for path in paths}


def random_instances(count, seed=None, sizes=DEFAULT_SIZES, density=1.0):
    """Deterministic random instance set; ``MLPR_SEED`` overrides ``seed``."""
    env = os.environ.get("MLPR_SEED")
    if env is not None:
        seed = int(env)
    seed = 0 if seed is None else seed
    out = {}
    for i in range(count):
        n = sizes[i % len(sizes)]
        out[f"rand{i:03d}_n{n}"] = random_problem(n, [seed, i], density)
    return out


def run_benchmark(instances, alphas=DEFAULT_ALPHAS, methods=METHODS, opts=None,
                  tau=0.01, jobs=1):
    """Solve every (instance, alpha, method) cell.

    ``instances`` is a directory of ``.mlpr`` files or a mapping
    ``{problem_id: problem}``. Records come back in canonical sorted order
    regardless of ``jobs``.
    """
    if not isinstance(instances, dict):
        instances = load_instances(instances)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    opts = opts or SolverOptions()
    cells = [(pid, p.with_alpha(a), m, opts, tau)
             for pid, p in instances.items() for a in alphas for m in methods]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_cell, cells, chunksize=4))
    else:
        records = [_cell(c) for c in cells]
    return sorted(records, key=BenchRecord.sort_key)


def records_to_csv(records, fh=None):
    """Write records as CSV; returns the text when ``fh`` is None."""
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.as_row())
    if fh is None:
        return buf.getvalue()


def read_records(fh):
    out = []
    for row in csv.DictReader(fh):
        its = float(row["iterations"]) if row["iterations"] else float("nan")
        out.append(BenchRecord(row["problem"], float(row["alpha"]), row["method"],
                               row["status"], its, float(row["wall_time_s"]),
                               float(row["residual"])))
    return out


def _cost(record, measure):
    if not record.converged:
        return math.inf
    if measure == "iterations":
        # A converged run that started at the solution still paid a residual check.
        return max(record.iterations, 1.0)
    return max(record.wall_time, 1e-9)


def performance_profile(records, measure="iterations", grid=PROFILE_GRID):
    """Fraction of problems each method solves within a factor ``f`` of the best.

    Problems are (problem_id, alpha) pairs. A method missing a problem, or
    failing it, gets ratio +inf there. Returns ``(grid, {method: fractions})``.
    """
    if measure not in ("iterations", "time"):
        raise ValueError(f"measure must be 'iterations' or 'time', got {measure!r}")
    records = list(records)
    if not records:
        raise ValueError("performance profile needs at least one record")
    methods = sorted({r.method for r in records},
                     key=lambda m: (METHODS.index(m) if m in METHODS else len(METHODS), m))
    problems = sorted({(r.problem_id, r.alpha) for r in records})
    pidx = {p: i for i, p in enumerate(problems)}
    cost = np.full((len(problems), len(methods)), math.inf)
    for r in records:
        cost[pidx[(r.problem_id, r.alpha)], methods.index(r.method)] = _cost(r, measure)
    best = cost.min(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        ratio = np.where(np.isfinite(best), cost / best, math.inf)
    grid = np.asarray(grid, dtype=float)
    curves = {m: [(ratio[:, j] <= f).mean() for f in grid] for j, m in enumerate(methods)}
    return grid, curves


def profile_to_csv(grid, curves, fh=None):
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    methods = list(curves)
    w.writerow(["ratio", *methods])
    for i, f in enumerate(grid):
        w.writerow([f"{f:.6g}", *(f"{curves[m][i]:.6g}" for m in methods)])
    if fh is None:
        return buf.getvalue()
