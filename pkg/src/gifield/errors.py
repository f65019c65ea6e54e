"""Exception types shared across the package."""


class GifieldError(Exception):
    """Base class for all package-specific errors."""


class FormatError(GifieldError, ValueError):
    """A file does not start with the expected magic tag."""


class CorruptionError(GifieldError, ValueError):
    """A file's payload does not match its declared structure."""


class DegenerateMatrixError(GifieldError, ValueError):
    """A matrix is unusable for the requested operation (zero column, zero rank, ...)."""


class RankError(GifieldError, ValueError):
    """Requested more sampling rows than the dictionary's Gram rank supports."""


class ConsistencyError(GifieldError, ValueError):
    """Two artifacts that must share provenance do not match."""


class NegativityError(GifieldError, ValueError):
    """A lifting constant is too small to make every matrix entry non-negative."""


class ValidationError(GifieldError, ValueError):
    """An experiment configuration is invalid."""
