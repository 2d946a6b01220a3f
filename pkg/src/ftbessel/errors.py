"""Exception hierarchy shared by every module."""


class FtBesselError(Exception):
    """Base class for all errors raised by :mod:`ftbessel`."""


class ParameterOutOfRange(FtBesselError, ValueError):
    """An argument lies outside the range an operation supports."""


class ResourceLimitError(FtBesselError):
    """A truncation window or sample budget would exceed its configured cap."""


class DegenerateDeterminantError(FtBesselError):
    """The Fredholm determinant is at or below its certified error floor."""


class PoleEvaluationError(FtBesselError, ValueError):
    """A meromorphic function was evaluated exactly on one of its poles."""


class UnsupportedPointError(FtBesselError, ValueError):
    """The requested point violates the hypothesis of the identity being checked."""


class InternalConsistencyError(FtBesselError):
    """Two independent evaluation routes disagreed beyond their error budget."""
