"""Exception types shared across the toolkit."""


class SalbenchError(Exception):
    """Base class for all toolkit errors."""


class UnknownTargetClassError(SalbenchError):
    """The requested target class does not occur in the sampling pool."""


class InsufficientPoolError(SalbenchError):
    """The sampling pool cannot supply the images a mosaic needs."""


class AssemblyError(SalbenchError):
    """An image could not be loaded, decoded, or resized during assembly."""

    def __init__(self, message: str, image_id: str | None = None):
        super().__init__(message)
        self.image_id = image_id


class SaliencyFormatError(SalbenchError):
    """A saliency interchange file is unreadable or violates its invariants.

    ``reason`` is a stable machine-readable code: one of
    ``malformed-header``, ``dimension-mismatch``, ``checksum-mismatch``,
    ``non-finite-value``, ``missing-metadata``, ``malformed-metadata``.
    """

    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason


class IdMismatchError(SalbenchError):
    """A saliency map and a mosaic spec refer to different mosaics or targets."""


class DimensionMismatchError(SalbenchError):
    """A value grid has a shape the operation cannot interpret."""


class TooFewValuesError(SalbenchError):
    """Not enough non-missing values to rank or correlate."""


class TooFewMethodsError(SalbenchError):
    """Reliability statistics need at least two methods."""
