"""Exception types shared across the engine."""


class HolotrapError(Exception):
    """Base class for all engine errors."""


class SpaceMismatchError(HolotrapError):
    """Operator or state does not fit the declared Fock space."""


class NotAntiHermitianError(HolotrapError):
    """A generator claimed anti-Hermitian fails the tolerance check."""


class DegeneracyError(HolotrapError):
    """Logical-subspace construction requested away from resonance."""


class TruncationError(HolotrapError):
    """Fock truncation too small for the requested operation."""


class LeakageBudgetError(HolotrapError):
    """State population escaping the retained space exceeds the budget."""


class LoopError(HolotrapError):
    """Malformed loop: open path, off-plane vertex, or unknown plane."""


class SelfIntersectingLoopError(LoopError):
    """Area requested for a non-simple loop."""


class OffPlaneError(HolotrapError):
    """Closed-form curvature requested off its plane of validity."""


class CalibrationError(HolotrapError):
    """Area-law fit failed linearity or consistency tolerances."""


class ConfigError(HolotrapError):
    """Invalid experiment configuration (CLI exit code 2)."""
