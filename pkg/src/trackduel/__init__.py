"""Two-vehicle racing duel simulator.

An attacker tries to overtake a defender over a short planning horizon.
Lateral intentions are decided by Monte Carlo tree search over a small
extensive-form game; for each complete intention sequence the actual
trajectories are the equilibrium of a coupled trajectory game solved by
iterative best response over a station/lateral lattice. Sportsmanship
rules (one-motion, enough-space) are detected on the resulting
trajectories and can penalize the defender's utility.
"""

__version__ = "0.1.0"

from .errors import (
    AmbiguousProjection,
    ConfigError,
    DomainViolation,
    EmptyInput,
    IncompleteHistory,
    Infeasible,
    LengthMismatch,
    NoChildren,
    OutOfRange,
    SolverFailure,
    TooLarge,
    TrackingFailure,
    Unreachable,
)

__all__ = [
    "AmbiguousProjection",
    "ConfigError",
    "DomainViolation",
    "EmptyInput",
    "IncompleteHistory",
    "Infeasible",
    "LengthMismatch",
    "NoChildren",
    "OutOfRange",
    "SolverFailure",
    "TooLarge",
    "TrackingFailure",
    "Unreachable",
    "__version__",
]
