class DomainError(ValueError):
    """Raised when an argument violates a precondition."""


class PoleError(DomainError):
    """Raised when the gamma function is evaluated at a pole."""


class AliasingError(DomainError):
    """Raised when a quadrature grid cannot resolve the requested modes."""


class ResolutionError(DomainError):
    """Raised when a concentration annulus holds too few grid nodes."""


class SingularityError(Exception):
    """Raised when a kernel is evaluated where it is singular."""


class AccuracyError(Exception):
    """Raised when a requested tolerance cannot be reached.

    The best available estimate and its error are kept on the exception so
    callers can still report them.
    """

    def __init__(self, msg, best_estimate=None, est_abs_error=None):
        super(AccuracyError, self).__init__(msg)
        self.best_estimate = best_estimate
        self.est_abs_error = est_abs_error


class ConcentrationError(AccuracyError):
    """Raised when a concentration sequence fails to converge."""

    def __init__(self, msg, last=None, previous=None, est_abs_error=None):
        super(ConcentrationError, self).__init__(msg, last, est_abs_error)
        self.last = last
        self.previous = previous


class DivergenceError(Exception):
    """Raised when an integrand does not decay."""


class ConfigurationError(Exception):
    """Raised when a config file is malformed."""


class UnknownExperimentError(Exception):
    """Raised when an unknown experiment is requested."""


class VerificationError(Exception):
    """Raised when a verification check fails."""
