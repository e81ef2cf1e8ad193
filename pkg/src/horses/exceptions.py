"""Exception types raised across the package."""


class HorsesError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(HorsesError, ValueError):
    pass


class NonFiniteInputError(HorsesError, ValueError):
    pass


class ConstantColumnError(HorsesError, ValueError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has zero variance and cannot be standardized")


class InvalidPenaltyError(HorsesError, ValueError):
    pass


class InfeasibleTError(HorsesError, ValueError):
    pass


class AlphaOneError(HorsesError, ValueError):
    pass


class InstanceTooLargeError(HorsesError, ValueError):
    pass


class WrongDimensionError(HorsesError, ValueError):
    pass


class SingularSystemError(HorsesError, ValueError):
    pass


class BadKError(HorsesError, ValueError):
    pass


class EmptyGridError(HorsesError, ValueError):
    pass


class DfTooLargeError(HorsesError, ValueError):
    pass


class NonpositiveRSSError(HorsesError, ValueError):
    pass


class BadModelIdError(HorsesError, ValueError):
    pass


class _WithResult(HorsesError, RuntimeError):
    def __init__(self, message, result):
        self.result = result
        super().__init__(message)


class MaxSweepsExceeded(_WithResult):
    """Raised when a coordinate-descent solver hits its sweep budget.

    The best iterate found so far is available as ``exc.result``.
    """


class MaxItersExceeded(_WithResult):
    """Raised when a reference oracle hits its iteration budget."""
