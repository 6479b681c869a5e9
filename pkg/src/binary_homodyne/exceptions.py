"""Exception hierarchy for binary_homodyne."""

from __future__ import annotations


class BHDError(Exception):
    """Base class for all package errors."""


class ValidationError(BHDError, ValueError):
    """An input violated a documented precondition."""


class NonFiniteError(BHDError, ArithmeticError):
    """An objective or integrand produced a non-finite value."""

    def __init__(self, message: str, abscissa: float):
        super().__init__(message)
        self.abscissa = abscissa


class ConvergenceError(BHDError, ArithmeticError):
    """A numerical routine did not converge; carries its best estimate."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class SampleFormatError(BHDError):
    """A sample file or its sidecar is malformed."""


class MissingSidecarError(SampleFormatError):
    pass


class ContradictorySidecarError(SampleFormatError):
    pass


class TruncatedPayloadError(SampleFormatError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"payload truncated: sidecar declares {expected} samples, found {actual}")
        self.expected = expected
        self.actual = actual


class InvalidScaleError(SampleFormatError):
    pass
