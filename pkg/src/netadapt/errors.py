"""Exception types raised across the package."""


class NetAdaptError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(NetAdaptError, ValueError):
    pass


class NotSymmetric(NetAdaptError, ValueError):
    pass


class NotPositiveDefinite(NetAdaptError, ValueError):
    pass


class NoConvergence(NetAdaptError, RuntimeError):
    pass


class DegenerateData(NetAdaptError, ValueError):
    pass


class MissingPredictions(NetAdaptError, ValueError):
    pass


class ZeroDegree(NetAdaptError, ValueError):
    pass


class Infeasible(NetAdaptError, ValueError):
    pass


class EmptyTrainingSet(NetAdaptError, ValueError):
    pass


class LengthMismatch(NetAdaptError, ValueError):
    pass


class ParseError(NetAdaptError, ValueError):
    """Malformed CSV input; ``row`` and ``col`` are 1-based when known."""

    def __init__(self, message, row=None, col=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if col is not None:
            loc.append(f"column {col}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.col = col


class RaggedRows(ParseError):
    pass


class NonIntegerLabel(ParseError):
    pass


class ConfigError(NetAdaptError, ValueError):
    pass
