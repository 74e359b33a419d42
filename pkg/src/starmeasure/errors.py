"""Exception hierarchy shared by every module."""


class StarMeasureError(Exception):
    pass


class DomainError(StarMeasureError, ValueError):
    """An argument lies outside the domain of an operation."""


class MapRangeError(StarMeasureError, ValueError):
    """A map sent a point outside the (inflated) bounding box of the grid."""

    def __init__(self, message, map_index=None, point=None):
        super().__init__(message)
        self.map_index = map_index
        self.point = point


class GroupError(StarMeasureError, ValueError):
    pass


class ValidationError(StarMeasureError):
    """A system or configuration failed validation.

    ``errors`` holds one human-readable line per violation.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ConvergenceError(StarMeasureError):
    """Raised when an iteration exhausts ``max_iter``; carries the partial trace."""

    def __init__(self, message, trace=None, measure=None):
        super().__init__(message)
        self.trace = trace
        self.measure = measure


class SizeCapError(StarMeasureError, ValueError):
    """An exhaustive oracle instance family would exceed its hard size cap."""
