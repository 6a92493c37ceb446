"""Exception types shared across the package.

Two broad families matter to the CLI: validation errors (bad user input,
exit code 2) and numeric failures (a computation that cannot proceed on
otherwise valid input, exit code 3).
"""


class FracdimError(Exception):
    """Base class for all package errors."""


class ValidationError(FracdimError):
    """Bad input: shapes, ranges, formats, flags."""


class NumericFailure(FracdimError):
    """Valid input led to a computation that cannot produce a result."""


# matrix_io
class MalformedHeader(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonFiniteEntry(ValidationError):
    pass


class IoFailure(FracdimError):
    pass


# metric
class IndexOutOfRange(ValidationError):
    pass


class EmptySubset(ValidationError):
    pass


# ph0
class TooFewPoints(ValidationError):
    pass


class NegativeAlpha(ValidationError):
    pass


# dimest
class ZeroLifetimes(NumericFailure):
    """Every subsample produced a zero lifetime sum; the cloud is degenerate."""


class SizesOutOfRange(ValidationError):
    pass


class EmptyDeltaList(ValidationError):
    pass


# synth
class InvalidSpec(ValidationError):
    pass


# trainer
class DivergedLoss(NumericFailure):
    """A non-finite loss value appeared during training or recording."""


class ShapeMismatch(ValidationError):
    pass


# stats
class LengthMismatch(ValidationError):
    pass


class ZeroVariance(NumericFailure):
    pass


class NoValidSlices(NumericFailure):
    pass


# bounds
class InvalidInputs(ValidationError):
    pass
