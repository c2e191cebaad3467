"""Exception hierarchy shared by all modules."""


class CapacityError(Exception):
    """Base class for every error raised by csmcap."""


class ParameterError(CapacityError, ValueError):
    """Input parameters outside their admissible domain."""


class GeometryError(CapacityError):
    """Charge disks overlap or a configuration invariant fails."""


class SymmetryError(GeometryError):
    """Point set is not centrosymmetric about its declared center."""


class SingularityError(CapacityError):
    """Coincident points make the log kernel singular."""


class ConfigurationError(CapacityError):
    """A summation or solver configuration cannot meet its contract."""


class CapacityGuardError(CapacityError):
    """A dense or direct path was requested beyond its size cap."""


class TheoremViolation(CapacityError):
    """A structural property of the system matrices failed to hold."""


class DegenerateSolutionError(CapacityError):
    """The reduced solve produced a non-positive charge sum."""


class NonGeometricSequenceError(CapacityError):
    """Successive differences do not have a single sign."""


class ExtrapolationError(CapacityError):
    """The log-difference fit cannot be used for extrapolation."""


class FactorizationError(CapacityError):
    """A preconditioner block is singular or fails its self-test."""
