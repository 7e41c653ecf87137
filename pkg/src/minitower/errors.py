"""Exception types shared across the package."""


class MiniTowerError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MiniTowerError):
    """A config, layer spec, or checkpoint does not fit together."""


class UsageError(MiniTowerError):
    """An API was called with invalid arguments or in an invalid state."""


class TrainingError(MiniTowerError):
    """Training produced non-finite values or otherwise cannot continue."""


class GenerationError(MiniTowerError):
    """The floor generator exhausted its retry budget."""


class RecordingError(MiniTowerError):
    """An episode recording file is malformed.

    ``offset`` is the byte offset at which parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SeedOverlapError(ConfigurationError):
    """Evaluation seeds intersect the training seed pool."""
