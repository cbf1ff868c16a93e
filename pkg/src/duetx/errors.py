"""Exception types raised across the package."""

from __future__ import annotations


class DuetError(Exception):
    """Base class for all package errors."""


class InvalidMeasure(DuetError, ValueError):
    pass


class SpaceMismatch(DuetError, ValueError):
    pass


class InvalidAct(DuetError, ValueError):
    pass


class InvalidParams(DuetError, ValueError):
    pass


class DegenerateMeet(DuetError, ValueError):
    """The meet of the two weighting measures has zero total mass."""


class NotConcordant(DuetError, ValueError):
    """alpha * P <= (1 - alpha) * Q fails on some atom."""


class SamplingExhausted(DuetError, RuntimeError):
    pass


class ExhaustionRefused(DuetError, ValueError):
    """Exhaustive enumeration was requested on a space that is too large."""


class Unsupported(DuetError, ValueError):
    pass


class ElicitationFailed(DuetError, RuntimeError):
    """A bisection could not bracket the indifference ratio for an atom pair."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair
