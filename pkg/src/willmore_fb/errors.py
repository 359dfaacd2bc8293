"""Typed failures raised by the toolkit.

Every error carries a JSON-serialisable ``payload`` so the CLI can surface it
verbatim on exit code 1.
"""

from __future__ import annotations

from typing import Any


class WillmoreFBError(Exception):
    """Base class for all computation errors."""

    def __init__(self, message: str, **payload: Any) -> None:
        super().__init__(message)
        self.payload = {"error": type(self).__name__, "message": message, **payload}


class DegenerateMetric(WillmoreFBError):
    pass


class NonFinite(WillmoreFBError):
    pass


class InsufficientGrid(WillmoreFBError):
    pass


class SupportViolation(WillmoreFBError):
    pass


class StepTooLarge(WillmoreFBError):
    pass


class NotOrthogonal(WillmoreFBError):
    pass


class ConstraintViolated(WillmoreFBError):
    pass


class NotConformal(WillmoreFBError):
    pass


class QuadratureFail(WillmoreFBError):
    pass


class SingularitySampled(WillmoreFBError):
    pass


class SingularityHit(WillmoreFBError):
    pass


class NotMinimal(WillmoreFBError):
    pass


class WindowTooWide(WillmoreFBError):
    pass


class AliasRisk(UserWarning):
    """Spectrum has not decayed at the truncation order."""


class NonMonotone(UserWarning):
    """Errors along a refinement ladder did not decrease."""
