"""Exception hierarchy shared across the package."""


class KdvAsymptoticsError(Exception):
    """Base class for all package errors."""


class ValidationError(KdvAsymptoticsError):
    """A constructor argument or configuration value violates an invariant."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ParseError(KdvAsymptoticsError):
    """A configuration document is not well-formed."""


class DecayViolation(KdvAsymptoticsError):
    """Initial data does not decay enough at the box boundary."""


class NonFiniteState(KdvAsymptoticsError):
    """A solver step produced NaN or infinity."""


class BoxTooSmall(KdvAsymptoticsError):
    """The periodic box cannot contain the solution for the requested time."""


class GridMismatch(KdvAsymptoticsError):
    """Two fields that must share a grid or time stamp do not."""


class InsufficientSnapshots(KdvAsymptoticsError):
    """Fewer snapshots than a finite-difference stencil requires."""


class SolvabilityBroken(KdvAsymptoticsError):
    """The exact algebraic cancellation b(c^2-k1) + a(c^2-k2) = 0 failed numerically."""


class DerivationMismatch(KdvAsymptoticsError):
    """The second-order solvability residual rejects the adopted constants."""


class OutOfBox(KdvAsymptoticsError):
    """An evaluation point left the region where the state is decayed."""
