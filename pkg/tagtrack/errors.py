"""Exception hierarchy shared by every tagtrack subpackage."""


class TagTrackError(Exception):
    """Root of all tagtrack errors."""


class DemParseError(TagTrackError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OutOfExtentError(TagTrackError, ValueError):
    """Query outside the grid extent or over a nodata neighborhood."""


class GeometryError(TagTrackError, ValueError):
    """Degenerate geometry: zero distance or horizontally coincident points."""


class NoMeasurementError(TagTrackError, RuntimeError):
    """A rotation log cannot produce an AoA measurement."""


class WeightCollapseError(TagTrackError, RuntimeError):
    """Every particle weight is zero."""


class ConfigError(TagTrackError, ValueError):
    def __init__(self, key_path: str, message: str):
        super().__init__(f"{key_path}: {message}")
        self.key_path = key_path


class MissionComplete(TagTrackError):
    """Raised when every belief is already localized."""
