"""Exception types shared across the package."""


class MirrorPlanError(Exception):
    """Base class for all package errors."""


class ConfigError(MirrorPlanError):
    """Invalid or malformed run configuration."""


class LengthMismatch(MirrorPlanError):
    """Two vectors that must have equal length do not."""


class InfeasibleMember(MirrorPlanError):
    """A constraint-violating member was offered where only feasible ones are allowed."""


class InitializationExhausted(MirrorPlanError):
    """A memory or batch slot could not be filled within the redraw budget."""


class TooFewPoints(MirrorPlanError):
    """Not enough (or not distinct enough) sample points for the requested analysis."""


class GeometricFailure(MirrorPlanError):
    """No valid mirror arrangement exists for the given design variables.

    Concrete failure modes are subclasses; the message carries the reason.
    The optimizer treats any GeometricFailure as discard-and-resample.
    """


class NoRoot(GeometricFailure):
    """The mirror-C angle equation has no admissible root."""


class DegenerateAngle(GeometricFailure):
    """The path-length denominator 1 + 2*tan(theta1) - tan^2(theta1) vanishes."""


class DegenerateRH(GeometricFailure):
    """Points R and H are vertically degenerate; the mirror-C slope is undefined."""


class ParallelLines(GeometricFailure):
    """Two lines required to intersect are (numerically) parallel."""


class ReflectionInconsistent(GeometricFailure):
    """The reflected camera point left the optical axis; derived lengths are inconsistent."""
