"""Exception hierarchy shared by all modules."""


class ModTwistError(Exception):
    """Base class for library errors."""


class CapacityError(ModTwistError):
    """A table or modulus is too small or too large for the request."""


class NoInverseError(ModTwistError, ValueError):
    pass


class UnsupportedWeightError(ModTwistError, ValueError):
    pass


class FormatError(ModTwistError):
    """Malformed or mismatched coefficient cache file."""


class PoleError(ModTwistError, ValueError):
    pass


class RegimeError(ModTwistError, ValueError):
    """An asymptotic formula was requested outside its stated regime."""


class PremiseError(ModTwistError, ValueError):
    """The hypotheses of a derivative-test bound do not hold."""


class ConvergenceError(ModTwistError):
    """Adaptive procedure did not converge; ``best`` holds the last estimate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class AdmissibilityError(ModTwistError, ValueError):
    """Contour abscissa or transform parameters outside the admissible range."""
