"""Exception hierarchy shared across the package."""

__all__ = [
    "BdSpectraError",
    "ExprSyntaxError",
    "UnknownIdentifier",
    "DomainError",
    "SpecError",
    "PositivityViolation",
    "RangeViolation",
    "OddOrder",
    "DegenerateOffDiagonal",
    "ResidualTooLarge",
    "AllZero",
    "FormMismatch",
    "ConvergenceFailure",
    "ProblemFileError",
]


class BdSpectraError(Exception):
    """Base class for every error raised by bdspectra."""


class ExprSyntaxError(BdSpectraError, ValueError):
    """Malformed coefficient expression.

    ``offset`` is the byte offset (UTF-8) into the source text.
    """

    def __init__(self, message, offset, source=""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} (at offset {offset})")


class UnknownIdentifier(ExprSyntaxError):
    def __init__(self, name, offset, source=""):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset, source)


class DomainError(BdSpectraError, ArithmeticError):
    """An expression could not be evaluated at ``t``."""

    def __init__(self, message, t=None, subexpr=None):
        self.t = t
        self.subexpr = subexpr
        where = f" in {subexpr}" if subexpr is not None else ""
        at = f" at t={t!r}" if t is not None else ""
        super().__init__(f"{message}{where}{at}")


class SpecError(BdSpectraError, ValueError):
    """Structurally invalid specification (wrong lengths, empty domain, ...)."""


class PositivityViolation(BdSpectraError, ValueError):
    """A birth-death coefficient broke ``a_j > 0``, ``b_j > 0`` (j >= 1), ``b_0 >= 0``."""

    def __init__(self, j, which, value, t):
        self.j = j
        self.which = which
        self.value = value
        self.t = t
        super().__init__(f"{which}_{j}({t!r}) = {value!r} violates positivity")


class RangeViolation(BdSpectraError, ValueError):
    """A random-walk coefficient left ``(0, 1)`` (``(0, 1]`` for ``c_0``)."""

    def __init__(self, j, value, t):
        self.j = j
        self.value = value
        self.t = t
        super().__init__(f"c_{j}({t!r}) = {value!r} outside its admissible range")


class OddOrder(BdSpectraError, ValueError):
    """Golub-Kahan reduction requested for a random walk of odd size.

    The size-(n+1) matrix then always has 0 as an eigenvalue; drop it and
    reduce an even-size problem instead.
    """


class DegenerateOffDiagonal(BdSpectraError, ValueError):
    def __init__(self, j):
        self.j = j
        super().__init__(f"off-diagonal entry {j} is zero; split the matrix there")


class ResidualTooLarge(BdSpectraError, ArithmeticError):
    def __init__(self, value):
        self.value = value
        super().__init__(f"eigenvector residual {value:.3e} exceeds tolerance")


class AllZero(BdSpectraError, ValueError):
    pass


class FormMismatch(BdSpectraError, RuntimeError):
    """Two algebraically identical formulas disagreed beyond tolerance."""


class ConvergenceFailure(BdSpectraError, RuntimeError):
    pass


class ProblemFileError(BdSpectraError, ValueError):
    """Problem file could not be read or does not match the schema."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message if key is None else f"{key}: {message}")
