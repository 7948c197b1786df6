"""
Exception hierarchy for the fracdiff service.

The CLI maps these classes onto process exit codes, so library code raises the most
specific class that applies.
"""

from typing import List, Optional, Sequence, Tuple


class FracDiffError(Exception):
    """Base class for all fracdiff errors."""


class DomainError(FracDiffError, ValueError):
    """An argument violates a documented precondition."""


class SymbolicOnlyError(DomainError):
    """A Dirac pulse was asked for a pointwise value."""


class ConvergenceError(FracDiffError, ArithmeticError):
    """A series, quadrature, root finder or Newton iteration missed its tolerance."""


class NoRootError(ConvergenceError):
    """No sign change was found in the scanned bracket."""

    def __init__(self, message: str, bracket: Tuple[float, float]):
        super().__init__(message)
        self.bracket = bracket


class AmbiguousRootError(ConvergenceError):
    """More than one sign change was found; the brackets are listed."""

    def __init__(self, message: str, brackets: Sequence[Tuple[float, float]]):
        super().__init__(message)
        self.brackets: List[Tuple[float, float]] = list(brackets)


class InversionError(ConvergenceError):
    """Numerical Laplace inversion produced non-finite values or lost precision."""

    def __init__(self, message: str, node: Optional[int] = None, condition: Optional[float] = None):
        super().__init__(message)
        self.node = node
        self.condition = condition


class IllPosedError(FracDiffError):
    """The discrete Volterra system is singular at some node."""

    def __init__(self, message: str, node: int, condition: float):
        super().__init__(message)
        self.node = node
        self.condition = condition


class UnsupportedProblemError(FracDiffError):
    """The requested problem is outside what the solution theory covers."""
