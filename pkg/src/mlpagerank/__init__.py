"""Solvers for the multilinear PageRank equation ``x = alpha R(x ⊗ x) + (1 - alpha) v``."""

from .continuation import (ContinuationTrace, InnerSolver, PredictorKind, continuation_solve,
                           first_derivative, predict, second_derivative, select_step)
from .equation import (DEFAULT_TOL, Criticality, Regime, Residual, classify, eval_G,
                       eval_G_jacobian, residual, sum_map)
from .errors import (InputError, MlprError, NumericalBreakdown, ParseError,
                     ReducibleMatrixError, SingularJacobianError, SubcriticalError)
from .minimal import (fixed_point_minimal, fixed_point_stochastic, newton_minimal,
                      newton_stochastic)
from .perron import (DeflationContext, build_P, deflate, perron_iteration, perron_newton,
                     perron_newton_jacobian, perron_vector, perron_vector_jacobian)
from .report import SolveReport, SolverOptions, Status
from .tensor import (MlprProblem, TransitionTensor, apply_bilinear, left_contraction,
                     parse_problem, random_problem, right_contraction, serialize_problem)

__version__ = "0.1.0"
