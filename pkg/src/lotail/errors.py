"""Exception hierarchy shared by all modules."""


class LotailError(ValueError):
    """Base class for every validation or domain error raised by lotail."""


class NonMonotoneValues(LotailError):
    pass


class NegativeValue(LotailError):
    pass


class UnsortedTimes(LotailError):
    pass


class MissingTimeZero(LotailError):
    pass


class TimeOutOfRange(LotailError):
    pass


class InvalidParams(LotailError):
    pass


class NotDyadic(LotailError):
    """Exact mode needs every input value to be a multiple of 2**-20."""


class DimensionMismatch(LotailError):
    pass


class TooManyVariables(LotailError):
    pass


class EmptyPointSet(LotailError):
    pass


class ZeroSamples(LotailError):
    pass


class ZeroVariance(LotailError):
    pass


class NonNestedCounts(LotailError):
    pass


class ParamOutOfRange(LotailError):
    pass


class InfeasiblePreset(LotailError):
    pass


class InfeasibleDimension(LotailError):
    pass


class HypothesisViolated(LotailError):
    """The inputs fall outside the hypotheses of the inequality being checked.

    Suites record these as skipped rather than failed.
    """
