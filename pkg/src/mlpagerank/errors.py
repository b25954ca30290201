"""Exception hierarchy shared by the solvers and the CLI."""


class MlprError(Exception):
    """Base class for all package errors."""


class InputError(MlprError, ValueError):
    """Invalid problem data or arguments (dimension mismatch, bad values)."""


class ParseError(InputError):
    """Malformed ``.mlpr`` text. Carries the 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class SubcriticalError(InputError):
    """A method that needs alpha > 1/2 was called in the subcritical regime."""


class ReducibleMatrixError(MlprError):
    """The Perron vector was requested for a reducible matrix.

    Zero patterns of this kind come from reducible chains; the instance has
    to be reduced (by removing the states that the minimal solution leaves
    at zero) before the Perron-based methods apply.
    """


class SingularJacobianError(MlprError, ArithmeticError):
    """A dense linear solve met a numerically zero pivot."""


class NumericalBreakdown(MlprError, ArithmeticError):
    """An iteration failed to produce a usable iterate.

    ``iterate`` optionally holds the offending vector (e.g. a diverged one).
    """

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate
