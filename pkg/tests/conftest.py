import numpy as np
import pytest

from mlpagerank import MlprProblem, TransitionTensor, random_problem


def scalar_problem(alpha):
    """n = 1: x = alpha x**2 + 1 - alpha, roots 1 and (1 - alpha) / alpha."""
    return MlprProblem(TransitionTensor([[1.0]]), [1.0], alpha)


def central_difference(f, x, direction, h):
    return (f(x + h * direction) - f(x - h * direction)) / (2.0 * h)


def rel_err(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(params=[(3, 1), (4, 2), (6, 3)], ids=lambda t: f"n{t[0]}-seed{t[1]}")
def dense_problem(request):
    n, seed = request.param
    return random_problem(n, seed, 1.0, alpha=0.9)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
