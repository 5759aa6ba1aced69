"""Exception types shared across the package.

The CLI maps these onto exit codes, so library code raises them instead of
returning sentinel values.
"""


class LctcError(Exception):
    """Base class for all package errors."""


class DegenerateGameError(LctcError, ValueError):
    """Raised when a game has no quantum value to compare against (Q(M) = 0)."""


class UncertifiableError(LctcError):
    """Raised when no round count below the search cap certifies the gap."""


class NoFiniteLifetimeError(LctcError, ValueError):
    """Raised when the static infidelity budget is already exhausted."""


class InfeasibleError(LctcError):
    """Raised when a readout target lies below the achievable error floor."""


class ConvergenceError(LctcError):
    """Raised when a numerical routine fails its self-convergence check."""


class ConfigError(LctcError, ValueError):
    """Raised for malformed or unknown configuration input."""
