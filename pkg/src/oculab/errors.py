"""Exception hierarchy shared across the package."""


class OculabError(Exception):
    """Base class for all domain errors."""


class GeometryError(OculabError):
    """Degenerate geometry: zero-length direction, coincident points, vertical gaze."""


class ConfigError(OculabError):
    """Invalid configuration. ``fields`` names the offending entries."""

    def __init__(self, message: str, fields: list[str] | None = None):
        super().__init__(message)
        self.fields = fields or []


class StreamOrderError(OculabError):
    """Sample timestamps are not strictly increasing."""


class SessionStateError(OculabError):
    """Operation applied to a session in the wrong state (e.g. finalize before end)."""


class ValidationError(OculabError):
    """Bad input value outside of configuration (empty name, unknown metric, ...)."""


class NotFoundError(OculabError):
    """Unknown patient, session, or node id."""


class ReferentialError(OculabError):
    """A record references an entity that does not exist."""


class CycleError(OculabError):
    """Adding a dependency would create a cycle. ``path`` holds the offending loop."""

    def __init__(self, message: str, path: list[str] | None = None):
        super().__init__(message)
        self.path = path or []


class LockedError(OculabError):
    """Node completion attempted before its prerequisites. ``missing`` lists them."""

    def __init__(self, message: str, missing: list[str] | None = None):
        super().__init__(message)
        self.missing = missing or []
