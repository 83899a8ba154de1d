"""
Exception hierarchy for signcorr.
"""

from typing import Optional


class SignCorrError(Exception):
    """Base class for all signcorr errors."""


class InvalidInputError(SignCorrError, ValueError):
    """A precondition of a library operation was violated."""


class ConfigError(InvalidInputError):
    """Inconsistent experiment or command-line configuration."""


class NumericalFailure(SignCorrError, RuntimeError):
    """A numerical procedure could not produce a trustworthy result."""


class NonConvergenceError(NumericalFailure):
    """Eigenvalue bracketing did not converge within the iteration cap."""

    def __init__(self, message: str, index: Optional[int] = None, eigenvalue: Optional[float] = None):
        super().__init__(message)
        self.index = index
        self.eigenvalue = eigenvalue


class NodeCountMismatch(NumericalFailure):
    """A solved eigenfunction has the wrong number of zeros (missed eigenvalue)."""

    def __init__(self, message: str, index: Optional[int] = None, eigenvalue: Optional[float] = None):
        super().__init__(message)
        self.index = index
        self.eigenvalue = eigenvalue


class SourceFailure(NumericalFailure):
    """A sign source failed while producing the sign at a given index."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (index {index})")
        self.index = index
