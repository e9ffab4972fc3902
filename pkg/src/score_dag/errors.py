"""Exception hierarchy shared by all modules."""


class ScoreDagError(Exception):
    """Base class for all package errors."""


class ConfigError(ScoreDagError, ValueError):
    """Invalid parameters or configuration."""


class CycleError(ScoreDagError, ValueError):
    """A graph that must be acyclic contains a directed cycle."""

    def __init__(self, message, node):
        super().__init__(message)
        self.node = node


class DataError(ScoreDagError, ValueError):
    """Malformed or degenerate input data."""


class DegenerateDataError(DataError):
    """Data with no spread, e.g. a zero median pairwise distance."""


class NumericalError(ScoreDagError, ArithmeticError):
    """A factorization or solve failed."""
