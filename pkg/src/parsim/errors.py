"""Exception types raised across the package."""


class ParsimError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ParsimError, ValueError):
    """Inconsistent dimensions or invalid user configuration."""


class EmptyTrajectoryError(ParsimError, ValueError):
    pass


class EmptyHorizonError(ParsimError, ValueError):
    pass


class DataLengthError(ParsimError, ValueError):
    """The trajectory is too short for the requested horizons."""


class PersistenceOfExcitationError(ParsimError):
    """A regressor Gram matrix is numerically singular.

    Attributes:
        i: future row index (1-based) of the failing ARX problem, or None
            for the projection estimator.
        singular_value: the offending smallest singular value.
    """

    def __init__(self, message, i=None, singular_value=None):
        super().__init__(message)
        self.i = i
        self.singular_value = singular_value


class RankDeficiencyError(ParsimError):
    """The requested order is not supported by the singular values."""


class ExtractionError(ParsimError):
    pass


class AlignmentError(ParsimError):
    pass


class HorizonInfeasibleError(ParsimError):
    pass


class BurnInNotFoundError(ParsimError):
    pass


class ConditionViolatedError(ParsimError):
    """The perturbation is too large for the SVD robustness result."""


class NumericalCovarianceError(ParsimError):
    pass


class FitError(ParsimError, ValueError):
    pass


class SweepError(ParsimError):
    pass
