"""Exception types shared across the package."""

from __future__ import annotations


class PrecurseError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class AlphabetMismatch(PrecurseError, ValueError):
    pass


class ModulusMismatch(PrecurseError, ValueError):
    pass


class BudgetExceeded(PrecurseError, RuntimeError):
    """A search or convolution grew past its configured size cap (CLI exit code 3)."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: size {size} exceeds budget {cap}")
        self.size = size
        self.cap = cap


class InsufficientTerms(PrecurseError, ValueError):
    pass


class ZeroLeadingCoefficient(PrecurseError, ArithmeticError):
    pass


class NonIntegralTerm(PrecurseError, ArithmeticError):
    pass


class NotInvertible(PrecurseError, ArithmeticError):
    """Leading coefficient has no inverse modulo the working modulus."""
