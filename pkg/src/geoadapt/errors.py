"""Exception types shared across the package."""


class GeoadaptError(Exception):
    """Base class for all package errors."""


class SingularCovarianceError(GeoadaptError):
    """Covariance matrix cannot be factorized (typically coincident locations
    with no nugget).  ``pairs`` lists the offending (i, j) index pairs when
    they could be identified."""

    def __init__(self, message: str, pairs=()):
        super().__init__(message)
        self.pairs = tuple(pairs)


class InfeasibleDesignError(GeoadaptError):
    """A constrained design could not be generated.  ``best_n`` is the largest
    point count achieved before giving up."""

    def __init__(self, message: str, best_n: int = 0):
        super().__init__(message)
        self.best_n = best_n


class InferenceError(GeoadaptError):
    """Model fitting could not be carried out on the given data."""


class CampaignError(GeoadaptError):
    """Invalid campaign operation (unknown ids, conflicting state, ...)."""

    def __init__(self, message: str, details=None):
        super().__init__(message)
        self.details = details
