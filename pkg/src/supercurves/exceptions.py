"""Exceptions raised by the supercurves package."""

from typing import Optional


class SupercurveError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SupercurveError, ValueError):
    """Raised for parameters, records or objects that violate their invariants."""

    def __init__(self, message: str, location: Optional[str] = None) -> None:
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class GhostSectionError(InvalidInputError):
    """
    A nonzero section over a constant map for a negative bundle degree.

    Such sections have no finite-energy smooth instance: over a ghost component
    the section vanishes identically.
    """


class UnsupportedConnectionError(InvalidInputError):
    pass


class TreeError(InvalidInputError):
    pass


class QuadratureError(SupercurveError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(
        self, message: str, estimate: float, error_estimate: float, panels: int
    ) -> None:
        super().__init__(
            f"{message} (estimate={estimate!r}, error={error_estimate!r}, "
            f"panels={panels})"
        )
        self.estimate = estimate
        self.error_estimate = error_estimate
        self.panels = panels


class NoBubbleError(SupercurveError):
    """The derivative of the family does not blow up at the requested point."""
