"""Exception types raised by the solver stack."""

from __future__ import annotations


class FracHelmError(Exception):
    """Base class for all package errors."""


class InvalidMeshError(FracHelmError, ValueError):
    pass


class InvalidExponentError(FracHelmError, ValueError):
    pass


class DimensionError(FracHelmError, ValueError):
    pass


class PreconditionerDegenerateError(FracHelmError, ArithmeticError):
    pass


class SolverError(FracHelmError):
    """Iterative solve failed; ``report`` holds the partial SolveReport."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BreakdownError(SolverError):
    pass


class NonConvergenceError(SolverError):
    pass


class InvariantViolation(FracHelmError, AssertionError):
    pass


class DegenerateGradientError(FracHelmError, ArithmeticError):
    pass


class OracleResonanceError(FracHelmError, ArithmeticError):
    pass
