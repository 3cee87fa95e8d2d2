"""
Exceptions and warnings raised by rovella.

Checks (axiom validation, domination, roof integrability) never raise on a
failed check, they return report records instead.
"""

__all__ = [
    "RovellaError",
    "ParameterViolation",
    "DomainError",
    "InfiniteTimeError",
    "SingularDerivativeError",
    "NearSingularityError",
    "StructureError",
    "ConvergenceError",
    "RangeError",
    "EmptyDomainError",
    "InconsistencyError",
    "BracketError",
    "IntegrabilityError",
    "ConfigError",
    "NearCuspWarning",
    "EigenGapWarning",
]


class RovellaError(Exception):
    """ Base class of all rovella errors. """


class ParameterViolation(RovellaError, ValueError):
    """ FlowParams violate one of the defining inequalities. """

    def __init__(self, inequality, message=None):
        self.inequality = inequality
        super().__init__(message or "@FlowParams: violated [{}]".format(inequality))


class DomainError(RovellaError, ValueError):
    """ A point is outside the domain of an operation. """


class InfiniteTimeError(DomainError):
    """ The point lies on the singular line and never leaves the cube. """


class SingularDerivativeError(DomainError):
    """ The derivative vanishes where it must not. """


class NearSingularityError(DomainError):
    """ An orbit came closer to the singular line than the cutoff. """

    def __init__(self, step, x, cutoff):
        self.step = step
        self.x = x
        self.cutoff = cutoff
        super().__init__(
            "@simulate: |x| = {:.3e} < x_min_cutoff = {:.1e} at step {}".format(abs(x), cutoff, step))


class StructureError(RovellaError, ValueError):
    """ The map lacks the structure an estimator needs (e.g. full branches). """


class ConvergenceError(RovellaError, RuntimeError):
    """ An iteration did not converge. """

    def __init__(self, message, gap=None, n_iter=None):
        self.gap = gap
        self.n_iter = n_iter
        super().__init__(message)


class RangeError(RovellaError, ValueError):
    """ A parameter lies outside the admissible range. """


class EmptyDomainError(RangeError):
    """ The spectral domain (alpha1, alpha2) is empty. """

    def __init__(self, alpha):
        self.alpha = alpha
        super().__init__("@Spectrum: empty domain, alpha1 = alpha2 = {:.12g}".format(alpha))


class InconsistencyError(RovellaError, RuntimeError):
    """ Two routes to the same quantity disagree. """

    def __init__(self, message, first=None, second=None):
        self.first = first
        self.second = second
        super().__init__(message)


class BracketError(RovellaError, RuntimeError):
    """ A root is not bracketed. """


class IntegrabilityError(RovellaError, RuntimeError):
    """ The roof function is numerically not integrable. """


class ConfigError(RovellaError, ValueError):
    """ A run config cannot be parsed or has invalid values. """


class NearCuspWarning(UserWarning):
    """ An orbit entered the derivative-floor region. """


class EigenGapWarning(UserWarning):
    """ The leading eigenvalue is not well separated. """
