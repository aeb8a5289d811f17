"""Exception hierarchy shared by every module."""


class QppError(Exception):
    """Base class for library errors."""


class ContractError(QppError, ValueError):
    """An input violates a documented precondition."""


class ConditioningError(QppError, ArithmeticError):
    """A numerical routine lost accuracy beyond its tolerance.

    ``step`` and ``residual`` locate the failure when known.
    """

    def __init__(self, message, *, step=None, residual=None):
        super().__init__(message)
        self.step = step
        self.residual = residual


class ResourceError(QppError, RuntimeError):
    """A requested computation exceeds a configured size cap."""
