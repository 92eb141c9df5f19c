"""Exception types shared across the pipeline."""


class CabinSynthError(Exception):
    """Base class for all cabinsynth errors."""


class ConfigError(CabinSynthError):
    """A configuration value is missing, malformed, or inconsistent."""


class ParseError(CabinSynthError):
    """A dataset file does not match its documented grammar."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class OutOfFOVError(CabinSynthError):
    """A pixel lies outside the camera's field of view."""


class EmptyRegionError(CabinSynthError):
    """An operation that needs at least one pixel/vertex got none."""


class IncompleteSceneError(CabinSynthError):
    """A scene is missing data required to annotate it."""


class DataMismatchError(CabinSynthError):
    """Dataset files disagree with each other (missing or inconsistent)."""


class BackendError(CabinSynthError):
    """A render backend is unavailable or failed."""
