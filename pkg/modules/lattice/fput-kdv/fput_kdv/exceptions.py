"""Errors raised by the lattice, KdV and harness layers."""

from typing import Optional


class FputKdvError(Exception):
    """Base class for all package errors."""


class NonFiniteError(FputKdvError):
    """A state entry became NaN or infinite during time stepping."""

    def __init__(self, message: str, time: Optional[float] = None) -> None:
        super().__init__(message if time is None else f"{message} (t={time!r})")
        self.time = time


class AliasingDetectedError(FputKdvError):
    """The KdV spectrum carries energy in its top third."""

    def __init__(self, time: float, ratio: float) -> None:
        super().__init__(f"Spectral tail ratio {ratio:.3e} exceeds tolerance at T={time!r}; refine the KdV grid")
        self.time = time
        self.ratio = ratio


class DomainExceededError(FputKdvError, ValueError):
    """A wave family was evaluated outside its time domain."""


class DegenerateFitError(FputKdvError, ValueError):
    """A log-log fit was requested on fewer than two distinct abscissae."""


class MassProfileError(FputKdvError, ValueError):
    """A generated mass coefficient is not strictly positive and finite."""
