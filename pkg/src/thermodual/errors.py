"""Exception and warning types.

Validation problems derive from :class:`ValueError`, numerical breakdowns from
:class:`ArithmeticError`. The CLI maps the two families onto distinct exit
codes.
"""


class ThermodualError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ThermodualError, ValueError):
    pass


class NumericalError(ThermodualError, ArithmeticError):
    pass


class NonPositiveParameter(ValidationError):
    pass


class InconsistentDictionary(ValidationError):
    pass


class PathTooShort(ValidationError):
    pass


class NonPositiveDuration(ValidationError):
    pass


class NegativeDuration(ValidationError):
    pass


class BadTimeOrder(ValidationError):
    pass


class BadParameters(ValidationError):
    pass


class GridTooCoarse(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class OutsideSector(ValidationError):
    pass


class OrderAtPole(ValidationError):
    pass


class GammaPole(ValidationError):
    pass


class CausticSingularity(NumericalError):
    pass


class SeriesNonConvergent(NumericalError):
    pass


class MassLossWarning(UserWarning):
    """Evolved density lost mass through the edges of a truncated grid."""
