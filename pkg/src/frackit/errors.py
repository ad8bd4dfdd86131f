"""Exception hierarchy shared by all modules.

Every error carries a ``category`` so the command-line front end can report
the failing module and the kind of failure without parsing messages.
"""

from __future__ import annotations


class FrackitError(Exception):
    """Base class for all library errors."""

    category = "error"


class DomainError(FrackitError, ValueError):
    """An argument lies outside the supported domain."""

    category = "domain"


class PoleError(DomainError):
    """Evaluation at a pole (e.g. Gamma at a non-positive integer)."""

    category = "pole"


class NumericalOverflowError(FrackitError, OverflowError):
    """A quantity exceeded the floating-point range."""

    category = "overflow"


class ExprSyntaxError(FrackitError, ValueError):
    """Malformed expression text."""

    category = "syntax"

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    category = "unknown-identifier"


class UnboundVariableError(FrackitError, KeyError):
    category = "unbound-variable"

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class DifferentiationError(FrackitError, ValueError):
    """Symbolic or finite-difference derivative not available."""

    category = "differentiation"


class NonFiniteError(FrackitError, ArithmeticError):
    """An integrand or state became NaN or infinite."""

    category = "non-finite"


class SingularPointError(DomainError):
    category = "singular-point"


class HypothesisError(DomainError):
    """A monotonicity or sign premise of a theorem does not hold on the grid."""

    category = "hypothesis"


class TruncationError(FrackitError, ArithmeticError):
    """A series could not be truncated to the requested accuracy."""

    category = "truncation"


class BlowUpError(NonFiniteError):
    category = "blow-up"

    def __init__(self, message: str, step: int) -> None:
        super().__init__(message)
        self.step = step
