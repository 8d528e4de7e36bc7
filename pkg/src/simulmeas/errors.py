"""Exception hierarchy shared by all modules."""


class MeasurementError(Exception):
    """Base class for every error raised by simulmeas."""


class InvalidDimensionError(MeasurementError, ValueError):
    pass


class InvalidOperatorError(MeasurementError, ValueError):
    """An operator fails a structural invariant (Hermitian, unitary, density...)."""


class OwnershipError(MeasurementError, ValueError):
    """An OutcomeSet was used with an observable it does not belong to."""


class CommutationError(MeasurementError, ValueError):
    pass


class NotAMeasurementError(MeasurementError, ValueError):
    """A measurement model does not reproduce the statistics of its declared observable."""


class LocalityError(MeasurementError, ValueError):
    pass


class PreconditionError(MeasurementError, ValueError):
    pass
