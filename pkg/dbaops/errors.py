"""
Exception hierarchy shared by every dbaops module.

The CLI maps these onto exit codes: `ConfigError` gives 2, `BuildError` gives 3.
"""


class DBAError(Exception):
    """Base class for all dbaops errors."""


class ParameterError(DBAError, ValueError):
    """A parameter record violates its invariants."""


class NotSymmetric(ParameterError):
    pass


class ImaginaryPartNotPositiveDefinite(ParameterError):
    pass


class ArityMismatch(ParameterError):
    pass


class FieldMismatch(ParameterError):
    pass


class EmptyWindow(ParameterError):
    pass


class RadiusCapExceeded(DBAError):
    """The requested theta accuracy needs a lattice radius above the cap."""


class PoleHit(DBAError):
    """A lattice or spectral value is undefined at the requested point."""


class DivisorProximity(PoleHit):
    """A point lies too close to a theta divisor to divide by theta."""


class SamplingExhausted(DBAError):
    pass


class UnexpectedNullspaceDimension(DBAError):
    pass


class BuildError(DBAError):
    """An operator could not be constructed."""


class NewtonDivergence(BuildError):
    pass


class TooFewIntersections(BuildError):
    pass


class SingularSolve(BuildError):
    pass


class ResidualTooLarge(BuildError):
    pass


class AmbiguousSolution(BuildError):
    pass


class ConfigError(DBAError, ValueError):
    """The run configuration is malformed or inconsistent."""


class OutputError(DBAError):
    """An emitted document violates its shipped schema."""
