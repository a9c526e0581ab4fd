"""Exception hierarchy shared by all mafkit modules."""


class MafkitError(Exception):
    """Base class for all mafkit errors."""


class InvalidInputError(MafkitError):
    """Malformed numeric input: non-finite values, bad shapes, zero vectors."""


class InsufficientDataError(MafkitError):
    """Too few observations for the requested operation."""


class SingularMatrixError(MafkitError):
    """A matrix required to be (numerically) positive definite is not."""


class DegenerateSeriesError(MafkitError):
    """A series is constant (or otherwise carries no usable variation)."""


class DegenerateResidualError(MafkitError):
    """Smoother residuals are numerically zero; the SNR statistic is undefined."""


class ParameterPoleError(MafkitError):
    """A closed-form expression was evaluated at a pole of its parameters."""


class InvalidConfigError(MafkitError):
    """Inconsistent or out-of-range run configuration."""


class CsvParseError(MafkitError):
    """CSV input violates the expected panel schema.

    Carries optional 1-based ``row``/``column`` locations for tooling.
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
