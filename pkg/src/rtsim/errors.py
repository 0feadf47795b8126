"""Exception types shared across the package.

The CLI maps each one onto a process exit code.
"""


class RTSError(Exception):
    exit_code = 1


class ConfigError(RTSError, ValueError):
    """Raised for an invalid or inconsistent configuration."""

    exit_code = 2


class OutputError(RTSError, OSError):
    exit_code = 3


class InvariantError(RTSError, RuntimeError):
    """A simulation invariant was broken; the run cannot continue."""

    exit_code = 4

    def __init__(self, message: str, state: dict | None = None):
        super().__init__(message)
        self.state = state or {}
