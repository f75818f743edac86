"""Exception hierarchy shared by every module."""


class FinslerLabError(Exception):
    """Base class for all errors raised by finslerlab."""


class InputError(FinslerLabError, ValueError):
    """Malformed arguments: wrong dimension, out-of-range parameter, empty grid."""


class DomainError(InputError):
    """A point lies outside the domain where the operation is defined."""


class ConfigurationError(FinslerLabError, ValueError):
    """A configuration violates a parameter window (e.g. 0 < C < K/B)."""


class UnsupportedDomainError(InputError):
    """The operation is not available for this domain kind."""


class DegeneracyError(FinslerLabError, ArithmeticError):
    """Numerical degeneracy: singular matrix, nonpositive kernel, etc."""


class SlitBundleError(DegeneracyError):
    """A derivative was requested at v = 0, where G need not be smooth."""


class PreconditionViolation(FinslerLabError):
    """A measured quantity fails the sign/window a theorem requires."""
