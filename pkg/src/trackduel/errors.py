"""Exception types shared across the package."""


class TrackDuelError(Exception):
    """Base class for all package errors."""


class AmbiguousProjection(TrackDuelError):
    """A point projects onto more than one centerline location."""


class OutOfRange(TrackDuelError):
    """A station lies outside [0, total centerline length]."""


class DomainViolation(TrackDuelError):
    """Control input leaves the arcsin/sqrt domain of the vehicle model."""


class Unreachable(TrackDuelError):
    """No feasible control reaches the requested target in one step."""


class LengthMismatch(TrackDuelError):
    """Trajectory pair with unequal step counts."""


class IncompleteHistory(TrackDuelError):
    """Intention history shorter than the full game."""


class Infeasible(TrackDuelError):
    """No collision-free lattice path exists."""


class TrackingFailure(TrackDuelError):
    """Tracked trajectory deviates from the lattice path beyond bound."""


class NoChildren(TrackDuelError):
    """Selection requested at a node without explored children."""


class TooLarge(TrackDuelError):
    """Exact game enumeration beyond the configured node budget."""


class SolverFailure(TrackDuelError):
    """Episode-level solver failure (propagated, episode flagged)."""


class EmptyInput(TrackDuelError):
    """An input file contained no records."""


class ConfigError(TrackDuelError):
    """Invalid configuration; message names the offending field."""
