"""
Exceptions raised by the S-transform toolkit.

Usage problems map to exit code 2, numerical problems to exit code 3.
"""


class FreeMultError(Exception):
    """Base class for every error raised by the package"""
    exit_code = 3


class ValidationError(FreeMultError):
    """Invalid parameters or an invalid JSON document"""
    exit_code = 2


class UnknownTag(ValidationError):
    pass


class ExponentBelowOne(ValidationError):
    pass


class OrderTooHigh(ValidationError):
    pass


class OutOfRange(ValidationError):
    """Argument outside the domain (delta - 1, 0)"""


class RegimeMismatch(ValidationError):
    pass


class MissingLimit(ValidationError):
    pass


class TooFewSamples(ValidationError):
    pass


class AtomAtZero(ValidationError):
    """The reciprocal pushforward needs mu({0}) = 0"""


class NotAvailable(FreeMultError):
    """The quantity has no implementation for this family"""
    exit_code = 2


class DomainTooSmall(FreeMultError):
    pass


class NonPositiveValue(FreeMultError):
    pass


class QuadratureFailure(FreeMultError):
    pass


class NoBracket(FreeMultError):
    pass


class NotRegularlyVarying(FreeMultError):
    pass


class AmbiguousRegime(FreeMultError):
    pass


class EigensolverFailure(FreeMultError):
    pass
