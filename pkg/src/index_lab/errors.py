"""Exception types raised across the workbench.

Every error derives from :class:`IndexLabError` so the harness can capture
module failures into run records without catching unrelated exceptions.
"""


class IndexLabError(Exception):
    """Base class for all workbench errors."""


class NonHermitianInput(IndexLabError):
    pass


class ConvergenceFailure(IndexLabError):
    pass


class IllConditionedSplit(IndexLabError):
    """Kernel detection could not separate small from large singular values.

    The partially computed result is attached so callers can report it.
    """

    def __init__(self, message, basis=None, dim=None, gap_ratio=None):
        super().__init__(message)
        self.basis = basis
        self.dim = dim
        self.gap_ratio = gap_ratio


class UndersampledLoop(IndexLabError):
    pass


class SpectrumTouchesZero(IndexLabError):
    pass


class DimensionMismatch(IndexLabError):
    pass


class NotOdd(IndexLabError):
    pass


class RefinementExhausted(IndexLabError):
    pass


class InconclusiveIndex(IndexLabError):
    pass


class DimensionOverflow(IndexLabError):
    pass


class QuadratureFailure(IndexLabError):
    pass


class NotInvertibleOutsideCompact(IndexLabError):
    pass


class GradingHypothesisViolated(IndexLabError):
    pass


class EmptyExterior(IndexLabError):
    pass


class NoAdmissibleLambda(IndexLabError):
    pass


class GradingAbsent(IndexLabError):
    pass


class HypersurfaceNotInGrid(IndexLabError):
    pass


class MethodDisagreement(IndexLabError):
    pass


class GapViolated(IndexLabError):
    pass


class ChernOracleMismatch(IndexLabError):
    pass


class NormExceeded(IndexLabError):
    pass


class ParseError(IndexLabError):
    pass


class ValidationError(IndexLabError):
    pass


class BaselineMissing(IndexLabError):
    pass


class SignatureTrivial(UserWarning):
    """Informational: compressions with an ungraded Dirac operator carry the zero class."""
