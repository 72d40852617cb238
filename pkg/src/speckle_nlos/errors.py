"""Exception types raised across the package."""


class SpeckleError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SpeckleError, ValueError):
    pass


class ShapeError(SpeckleError, ValueError):
    pass


class DomainError(SpeckleError, ValueError):
    pass


class DegenerateGeometryError(SpeckleError, ValueError):
    pass


class DegenerateInputError(SpeckleError, ValueError):
    pass


class ParseError(SpeckleError):
    """Malformed binary input. ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class CorruptCheckpointError(ParseError):
    pass


class TrainingError(SpeckleError):
    def __init__(self, message, epoch):
        super().__init__(f"{message} (epoch {epoch})")
        self.epoch = epoch


class SamplingWarning(UserWarning):
    """Grid sampling is too coarse for the requested propagation distance."""


class GenerationError(SpeckleError):
    def __init__(self, message, index):
        super().__init__(f"record {index}: {message}")
        self.index = index
