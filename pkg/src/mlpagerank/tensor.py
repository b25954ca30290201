"""Problem data for multilinear PageRank, bilinear kernels and ``.mlpr`` I/O.

The transition tensor is stored flattened as an ``n x n**2`` matrix ``R``.
Column ``j*n + k`` (0-based) holds the distribution of the next state given
that the two previous states were ``(j, k)``. With this ordering the column
index matches ``np.kron(x, y)``, so ``R @ np.kron(x, y)`` is ``R(x ⊗ y)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParseError

COLUMN_SUM_TOL = 1e-12
REPAIR_TOL = 1e-8


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TransitionTensor:
    """Column-stochastic ``n x n**2`` matrix of second-order transitions."""

    entries: np.ndarray

    def __post_init__(self):
        R = _frozen(self.entries)
        if R.ndim != 2 or R.shape[0] == 0 or R.shape[1] != R.shape[0] ** 2:
            raise InputError(f"R must have shape (n, n**2), got {R.shape}")
        if not np.all(np.isfinite(R)):
            raise InputError("R has non-finite entries")
        if np.any(R < 0):
            raise InputError("R has negative entries")
        defect = np.abs(R.sum(axis=0) - 1.0)
        bad = np.flatnonzero(defect > COLUMN_SUM_TOL)
        if bad.size:
            raise InputError(
                f"column {bad[0]} of R sums to {R[:, bad[0]].sum()!r}, expected 1")
        object.__setattr__(self, "entries", R)
        object.__setattr__(self, "_cube", R.reshape(R.shape[0], R.shape[0], R.shape[0]))

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def cube(self):
        """View of ``R`` as an order-3 array ``T[i, j, k]``."""
        return self._cube

    def __eq__(self, other):
        if not isinstance(other, TransitionTensor):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)


@dataclass(frozen=True, eq=False)
class MlprProblem:
    """An instance ``x = alpha R(x ⊗ x) + (1 - alpha) v``.

    ``repaired`` is set when the parser had to renormalize column sums
    that were off by more than 1e-12 but at most 1e-8.
    """

    R: TransitionTensor
    v: np.ndarray
    alpha: float
    repaired: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.R, TransitionTensor):
            object.__setattr__(self, "R", TransitionTensor(self.R))
        v = _frozen(self.v)
        if v.shape != (self.R.n,):
            raise InputError(f"v must have length {self.R.n}, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InputError("v must be finite and nonnegative")
        if abs(v.sum() - 1.0) > COLUMN_SUM_TOL:
            raise InputError(f"v sums to {v.sum()!r}, expected 1")
        alpha = float(self.alpha)
        if not 0.0 < alpha < 1.0:
            raise InputError(f"alpha must lie in (0, 1), got {alpha!r}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self):
        return self.R.n

    def with_alpha(self, alpha):
        """Same tensor and teleportation vector, different ``alpha``."""
        return MlprProblem(self.R, self.v, alpha, repaired=self.repaired)

    def __eq__(self, other):
        if not isinstance(other, MlprProblem):
            return NotImplemented
        return (self.R == other.R and np.array_equal(self.v, other.v)
                and self.alpha == other.alpha)


def _as_tensor(R):
    return R if isinstance(R, TransitionTensor) else TransitionTensor(R)


def _check_vec(x, n, name="x"):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise InputError(f"{name} must have length {n}, got shape {x.shape}")
    return x


def apply_bilinear(R, x, y):
    """Return ``R(x ⊗ y)``, i.e. ``z_i = sum_{j,k} R[i, j*n+k] x_j y_k``."""
    R = _as_tensor(R)
    x = _check_vec(x, R.n, "x")
    y = _check_vec(y, R.n, "y")
    return np.einsum("ijk,j,k->i", R.cube, x, y)


def left_contraction(R, x):
    """Matrix ``R(x ⊗ I)``: maps ``y`` to ``R(x ⊗ y)``."""
    R = _as_tensor(R)
    x = _check_vec(x, R.n)
    return np.einsum("ijk,j->ik", R.cube, x)


def right_contraction(R, x):
    """Matrix ``R(I ⊗ x)``: maps ``y`` to ``R(y ⊗ x)``."""
    R = _as_tensor(R)
    x = _check_vec(x, R.n)
    return np.einsum("ijk,k->ij", R.cube, x)


def random_problem(n, seed, density=1.0, alpha=0.9):
    """Random instance with ``n`` states.

    Each entry of ``R`` and ``v`` is kept with probability ``density``
    (at least one per column), drawn uniformly from (0, 1] and the columns
    are then normalized. Deterministic for a fixed ``seed``.
    """
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    if not 0.0 < density <= 1.0:
        raise InputError(f"density must lie in (0, 1], got {density!r}")
    n = int(n)
    rng = np.random.default_rng(seed)

    def columns(rows, cols):
        vals = 1.0 - rng.random((rows, cols))
        mask = rng.random((rows, cols)) < density
        empty = ~mask.any(axis=0)
        mask[rng.integers(rows, size=cols)[empty], np.flatnonzero(empty)] = True
        vals = np.where(mask, vals, 0.0)
        return vals / vals.sum(axis=0)

    R = columns(n, n * n)
    v = columns(n, 1)[:, 0]
    return MlprProblem(TransitionTensor(R), v, alpha)


# -- .mlpr text format -------------------------------------------------------

def _tokens(text):
    """Yield ``(line_no, [(col_no, token), ...])`` for non-empty lines."""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = []
        col = 0
        for tok in line.split():
            col = line.index(tok, col)
            toks.append((col + 1, tok))
            col += len(tok)
        if toks:
            yield line_no, toks


def _parse_floats(line_no, toks, expected, what):
    if len(toks) != expected:
        raise ParseError(f"{what}: expected {expected} numbers, found {len(toks)}",
                         line=line_no)
    out = np.empty(expected)
    for i, (col, tok) in enumerate(toks):
        try:
            val = float(tok)
        except ValueError:
            raise ParseError(f"non-numeric token {tok!r}", line=line_no, column=col) from None
        if not np.isfinite(val):
            raise ParseError(f"non-finite value {tok!r}", line=line_no, column=col)
        if val < 0:
            raise ParseError(f"negative entry {tok!r}", line=line_no, column=col)
        out[i] = val
    return out


def _repair_sums(a, what):
    """Renormalize columns of ``a`` whose sums are off by at most REPAIR_TOL."""
    sums = a.sum(axis=0)
    defect = np.abs(sums - 1.0)
    bad = np.flatnonzero(defect > REPAIR_TOL)
    if bad.size:
        c = bad[0]
        raise ParseError(f"{what} column {c} sums to {sums[c]!r}, expected 1")
    if np.any(defect > COLUMN_SUM_TOL):
        return a / sums, True
    return a, False


def parse_problem(text, alpha):
    """Parse ``.mlpr`` text into a problem with the given ``alpha``.

    The file holds ``n``, then ``n`` rows of ``R`` (``n**2`` numbers each),
    then ``v``. ``#`` starts a comment; blank lines are skipped.
    """
    lines = iter(_tokens(text))
    try:
        line_no, toks = next(lines)
    except StopIteration:
        raise ParseError("empty file: expected the state count n") from None
    if len(toks) != 1:
        raise ParseError("header must contain only the state count n", line=line_no)
    col, tok = toks[0]
    try:
        n = int(tok)
    except ValueError:
        raise ParseError(f"state count {tok!r} is not an integer",
                         line=line_no, column=col) from None
    if n < 1:
        raise ParseError(f"state count must be positive, got {n}", line=line_no, column=col)

    rows = []
    for i in range(n + 1):
        try:
            line_no, toks = next(lines)
        except StopIteration:
            what = f"row {i} of R" if i < n else "v"
            raise ParseError(f"unexpected end of file while reading {what}") from None
        if i < n:
            rows.append(_parse_floats(line_no, toks, n * n, f"row {i} of R"))
        else:
            v = _parse_floats(line_no, toks, n, "v")
    extra = next(lines, None)
    if extra is not None:
        raise ParseError("trailing data after v", line=extra[0])

    R, fixed_R = _repair_sums(np.vstack(rows), "R")
    v, fixed_v = _repair_sums(v[:, None], "v")
    return MlprProblem(TransitionTensor(R), v[:, 0], alpha, repaired=fixed_R or fixed_v)


def serialize_problem(problem):
    """Render ``problem`` as ``.mlpr`` text (17 significant digits; alpha is not stored)."""
    fmt = lambda row: " ".join(f"{x:.17g}" for x in row)  # noqa: E731
    lines = [str(problem.n)]
    lines.extend(fmt(row) for row in problem.R.entries)
    lines.append(fmt(problem.v))
    return "\n".join(lines) + "\n"


def load_problem(path, alpha):
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read(), alpha)


def save_problem(problem, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_problem(problem))
