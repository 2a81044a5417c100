"""Domain error types shared across the package."""


class BykovError(Exception):
    """Base class for all domain failures."""


class ConfigError(BykovError):
    """Malformed configuration input (syntax, unknown key, bad literal)."""


class OnStableManifold(BykovError):
    """A local passage map was applied on (or too close to) the stable manifold."""


class TooFewSamples(BykovError):
    """A curve classifier needs more samples than were provided."""


class DegenerateUnfolding(BykovError):
    """An operation requires a positive symmetry-breaking amplitude."""


class InsufficientResolution(BykovError):
    """Adaptive refinement exhausted its budget without isolating a feature."""


class CrossingUncertain(BykovError):
    """Edge images pass too close to a rectangle corner to certify a crossing."""


class RealizationFailed(BykovError):
    """Itinerary refinement stalled; carries the longest realized prefix."""

    def __init__(self, message: str, realized_prefix: int = 0):
        super().__init__(message)
        self.realized_prefix = realized_prefix
