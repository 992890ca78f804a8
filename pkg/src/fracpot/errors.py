"""Exception and warning types raised by fracpot."""


class FracPotError(Exception):
    """Base class for all library errors."""


class NonConvergence(FracPotError):
    """A series or a limiting sequence did not converge to the requested accuracy."""


class DomainError(FracPotError, ValueError):
    """An identity or operation is evaluated outside its domain."""


class QuadratureFailure(FracPotError):
    """The quadrature error estimate exceeds the requested tolerance."""


class SingularInput(FracPotError, ValueError):
    """The requested point is a singularity of the integrand or kernel."""


class GridTooCoarse(FracPotError):
    """A discrete operator's error estimate exceeds the requested tolerance."""


class ConfigError(FracPotError, ValueError):
    """An experiment configuration is malformed or out of domain."""


class HypothesisViolation(UserWarning):
    """Inputs fall outside the hypotheses under which a result is guaranteed."""
