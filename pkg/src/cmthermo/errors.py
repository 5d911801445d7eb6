"""Exception and warning types raised by cmthermo."""


class ThermoError(Exception):
    """Base class for all cmthermo errors."""


class DomainError(ThermoError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class InvalidDegeneracyError(DomainError):
    pass


class InvalidGapError(DomainError):
    pass


class InvalidBathError(DomainError):
    pass


class SingularPopulationError(DomainError):
    pass


class NoBracketError(DomainError):
    pass


class AbsorbingStateError(DomainError):
    pass


class PartitionMismatchError(DomainError):
    pass


class NoJumpsError(DomainError):
    pass


class InvalidRootError(DomainError):
    pass


class TrajectoryOverflowError(ThermoError, RuntimeError):
    """Raised when a stored trajectory would exceed the jump cap."""


class DegenerateBosonicWarning(UserWarning):
    """Exactly degenerate levels coupled to a bosonic bath get zero rate."""
