"""Exception types raised across the package."""


class DiversityError(Exception):
    """Base class for all package errors."""


class ConstantVector(DiversityError, ValueError):
    """A vector with zero variance was passed where a correlation is needed."""


class LengthMismatch(DiversityError, ValueError):
    pass


class ShapeMismatch(DiversityError, ValueError):
    pass


class TooFewLearners(DiversityError, ValueError):
    pass


class NotSymmetric(DiversityError, ValueError):
    pass


class OutOfRange(DiversityError, ValueError):
    pass


class InfeasibleSummary(DiversityError, ValueError):
    pass


class DegenerateProfile(DiversityError, ValueError):
    pass


class EvenJury(DiversityError, ValueError):
    pass


class InfeasibleSpec(DiversityError, ValueError):
    pass


class UnachievableCorrelation(DiversityError, ValueError):
    pass


class NotScalar(DiversityError, ValueError):
    pass


class ConstantTruthColumn(DiversityError, ValueError):
    pass


class EmptyData(DiversityError, ValueError):
    pass


class EmptyTraining(DiversityError, ValueError):
    pass


class FactoryFailure(DiversityError, RuntimeError):
    pass


class ParseError(DiversityError, ValueError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class MissingLabelColumn(DiversityError, KeyError):
    pass


class DatasetTooSmall(DiversityError, ValueError):
    pass


class OutOfRangeLabel(DiversityError, ValueError):
    pass


class KTooLarge(DiversityError, ValueError):
    pass


class DegenerateAlpha(DiversityError, ValueError):
    pass


class ConfigError(DiversityError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
