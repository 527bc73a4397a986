"""
Exception hierarchy shared by all workbench apps.

Messages carry the fixed phrases the CLI and tests match on.
"""


class WorkbenchError(Exception):
    """Base class for every error raised by the workbench."""


class GeometryError(WorkbenchError):
    pass


class PerturbationError(GeometryError):
    pass


class SolvabilityError(WorkbenchError):
    pass


class TruncationError(WorkbenchError):
    pass


class StateError(WorkbenchError):
    pass


class ConfigError(WorkbenchError):
    """Config problems; ``lineno`` points into the config file when known."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class AssertionFailure(WorkbenchError):
    """A suite assertion did not hold; mapped to exit code 2."""
