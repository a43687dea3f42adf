"""Exception types shared across the package."""


class KmodelError(Exception):
    """Base class for all kmodel errors."""


class EventLogError(KmodelError):
    """Malformed or mis-ordered activity event log."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class TreeError(KmodelError):
    """Knowledge tree definition failed validation."""


class NotFoundError(KmodelError):
    """A person, tree node, or input key does not exist."""


class OrderingError(KmodelError):
    """An append would violate learning-history ordering."""


class StoreError(KmodelError):
    """Corrupt or unwritable history store file."""


class MathDomainError(KmodelError):
    """A statistic is undefined for the given inputs."""


class ConfigError(KmodelError):
    """Invalid configuration value."""
