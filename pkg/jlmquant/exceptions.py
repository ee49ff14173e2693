"""Exceptions for jlmquant."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

    import sympy as sp


class JlmError(Exception):
    """Base error for the toolkit."""


class ExpressionParseError(JlmError):
    """Expression text does not follow the grammar."""

    def __init__(self, message: str, text: str, position: int) -> None:
        """Keep the offending position for reporting."""
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class UnknownVariableError(ExpressionParseError):
    """Identifier not declared in the variable context."""


class UnsupportedExpressionError(JlmError):
    """Expression leaves the rational-plus-log class."""


class ZeroDenominatorError(JlmError):
    """Division by the zero polynomial or log of zero."""


class UnsupportedIntegrandError(JlmError):
    """Integrand outside the shifted-power class."""

    def __init__(self, term: sp.Expr, variable: sp.Symbol) -> None:
        """Name the offending term."""
        super().__init__(f"cannot integrate {term} with respect to {variable}")
        self.term = term
        self.variable = variable


class NotPolynomialError(JlmError):
    """Expression is not polynomial in the requested variables."""


class NonlinearSystemError(JlmError):
    """Equation is not affine in the unknowns."""


class SymmetryVerificationError(JlmError):
    """Generator fails the symmetry condition."""

    def __init__(self, label: str, residual: sp.Expr) -> None:
        """Keep the residual for reporting."""
        super().__init__(f"{label} is not a symmetry, residual {residual}")
        self.label = label
        self.residual = residual


class MultiplierError(JlmError):
    """Multiplier input is zero or fails its defining equation."""


class AnsatzInsufficientError(JlmError):
    """No solution within the ansatz."""

    def __init__(self, message: str, constraints: Sequence[sp.Expr] = ()) -> None:
        """Keep the unresolved constraints."""
        super().__init__(message)
        self.constraints = tuple(constraints)


class NotParabolicError(JlmError):
    """Reduction requested for a PDE that is not parabolic."""


class CharacteristicError(JlmError):
    """Characteristic coordinate cannot be found or fails its check."""


class ProblemConfigError(JlmError):
    """Problem file is invalid."""


class StageError(JlmError):
    """Pipeline stage failed."""

    def __init__(self, stage: str, message: str) -> None:
        """Name the failing stage."""
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class ConsistencyError(JlmError):
    """Internal cross-check between two exact computations disagrees."""


class DegenerateTransformError(JlmError):
    """Change of variables with vanishing Jacobian."""
