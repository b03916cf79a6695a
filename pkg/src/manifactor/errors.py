"""Exception hierarchy shared across the package."""


class ManifactorError(Exception):
    """Base class for all errors raised by manifactor."""


class ParseError(ManifactorError, ValueError):
    """Malformed input file."""


class ConfigError(ManifactorError, ValueError):
    """Invalid parameter or configuration value."""


class DataError(ManifactorError, ValueError):
    """Data violates a precondition (negative entries, too few instances...)."""


class ShapeError(ManifactorError, ValueError):
    """Array dimensions do not line up."""


class NumericError(ManifactorError, ArithmeticError):
    """NaN/Inf or overflow inside a numerical routine."""


class SelectionError(ManifactorError, ValueError):
    """Empty or otherwise unusable exemplar set."""
