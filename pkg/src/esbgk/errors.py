"""Exception types shared across the solver."""


class ESBGKError(Exception):
    """Base class for solver errors."""


class InvalidStateError(ESBGKError):
    """Density or temperature fell below the vacuum floor.

    ``cells`` holds the flat indices of the offending spatial cells.
    """

    def __init__(self, message, cells=()):
        super().__init__(message)
        self.cells = tuple(int(c) for c in cells)


class SPDError(ESBGKError):
    """The corrected temperature tensor is not positive definite."""


class CFLError(ESBGKError):
    """Time step violates the transport stability limit."""


class WallError(ESBGKError):
    """Diffusive wall with no outgoing flux (vacuum at the wall)."""


class ConfigError(ESBGKError):
    """Invalid or incomplete scenario configuration."""
