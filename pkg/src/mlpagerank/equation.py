"""The map ``G``, its Jacobian, the residual and the criticality split."""

import enum
from dataclasses import dataclass

import numpy as np

from .tensor import apply_bilinear, left_contraction, right_contraction, _check_vec

#: Default stopping threshold: square root of the double-precision unit roundoff.
DEFAULT_TOL = float(np.sqrt(np.finfo(float).eps))


def eval_G(p, x):
    """``G(x) = alpha R(x ⊗ x) + (1 - alpha) v``."""
    x = _check_vec(x, p.n)
    return p.alpha * apply_bilinear(p.R, x, x) + (1.0 - p.alpha) * p.v


def eval_G_jacobian(p, x):
    """``G'_x = alpha R(x ⊗ I) + alpha R(I ⊗ x)``."""
    x = _check_vec(x, p.n)
    return p.alpha * (left_contraction(p.R, x) + right_contraction(p.R, x))


def sum_map(alpha, u):
    """Scalar map ``g(u) = alpha u**2 + 1 - alpha``; ``1'G(x) = g(1'x)``."""
    return alpha * u * u + 1.0 - alpha


class Regime(enum.Enum):
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class Criticality:
    """Regime of ``alpha`` and the two sums a solution can have."""

    regime: Regime
    stochastic_sum: float
    minimal_sum: float

    @property
    def admissible_sums(self):
        return (self.stochastic_sum, self.minimal_sum)


def classify(alpha):
    """Subcritical iff ``alpha <= 1/2``.

    In the subcritical case the minimal solution is the stochastic one, so
    ``minimal_sum`` is 1; otherwise it is ``(1 - alpha) / alpha < 1``.
    """
    if alpha <= 0.5:
        return Criticality(Regime.SUBCRITICAL, 1.0, 1.0)
    return Criticality(Regime.SUPERCRITICAL, 1.0, (1.0 - alpha) / alpha)


@dataclass(frozen=True)
class Residual:
    value: float
    vector: np.ndarray


def residual(p, x):
    """1-norm residual ``||G(x) - x||_1``."""
    vec = eval_G(p, x) - np.asarray(x, dtype=float)
    return Residual(float(np.abs(vec).sum()), vec)
