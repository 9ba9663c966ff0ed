"""Exception and warning types raised by rieszcert."""

from __future__ import annotations

from typing import Any


class RieszCertError(Exception):
    """Base class for every error raised by the package."""


class InvalidInput(RieszCertError, ValueError):
    """Inputs violate a documented precondition."""


class NumericalError(RieszCertError, ArithmeticError):
    """A computation cannot be carried out reliably."""


class ConfigError(InvalidInput):
    pass


class EmptyFamily(InvalidInput):
    pass


class InvalidSegment(InvalidInput):
    pass


class OverlappingSegments(InvalidInput):
    pass


class NotHermitian(InvalidInput):
    pass


class SpectrumOutsideSegments(InvalidInput):
    pass


class InvalidSpec(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class IncompleteSystem(InvalidInput):
    """A projection system is not complete (or not minimal) enough to expand vectors."""


class ParseError(InvalidInput):
    """Malformed Matrix Market input."""

    def __init__(self, message: str, path: str | None = None,
                 line: int | None = None, column: int | None = None) -> None:
        location = ""
        if path is not None:
            location = str(path)
        if line is not None:
            location += f":{line}"
            if column is not None:
                location += f":{column}"
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.line = line
        self.column = column


class LambdaOnSpectrum(NumericalError):
    pass


class SingularShift(NumericalError):
    pass


class ContourHitsSpectrum(SingularShift):
    """A quadrature node landed on (numerically) the spectrum of A."""


class InsideNeighborhood(NumericalError):
    pass


class QuadratureStalled(NumericalError):
    """Order doubling hit its cap before the idempotency residual met the tolerance."""

    def __init__(self, message: str, residual: float, order: int,
                 matrix: Any = None) -> None:
        super().__init__(message)
        self.residual = residual
        self.order = order
        self.matrix = matrix


class UnassignedEigenvalue(NumericalError):
    pass


class DefectiveMatrix(NumericalError):
    """The eigenvector matrix of A cannot be inverted."""


class IndefiniteGram(NumericalError):
    pass


class RankDeficientBlock(NumericalError):
    pass


class ContourTouchesSpectrumNeighborhood(NumericalError):
    pass


class IdentityViolation(NumericalError):
    """An exact identity failed beyond its tolerance."""


class IllConditionedShift(RuntimeWarning):
    pass


class NearDefective(RuntimeWarning):
    pass
