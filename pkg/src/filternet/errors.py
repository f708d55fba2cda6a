"""Exception types shared across the package.

Every error raised on purpose derives from FilterNetError so callers
(and the CLI) can map failures to exit codes without string matching.
"""


class FilterNetError(Exception):
    """Base class for all errors this package raises deliberately."""


class ShapeError(FilterNetError, ValueError):
    """An array had the wrong shape for the requested operation."""


class DataError(FilterNetError):
    """A dataset, manifest, or image file was missing or malformed."""


class ModelFormatError(FilterNetError):
    """A model or checkpoint file failed structural validation."""


class NumericalError(FilterNetError):
    """Training produced a non-finite value and cannot continue."""
