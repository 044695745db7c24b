"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the CLI uses for it.
"""


class ExpDepthError(Exception):
    exit_code = 1


class UsageError(ExpDepthError, ValueError):
    """Malformed input: bad group spec, element literal, family mismatch."""

    exit_code = 2


class CapacityError(ExpDepthError):
    """A configured cap (table order, ball budget, integer width) was exceeded.

    ``partial`` holds whatever partial result is meaningful, e.g. the
    largest depth seen before a ball budget ran out.
    """

    exit_code = 3

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NumericalError(ExpDepthError, ArithmeticError):
    exit_code = 4

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
