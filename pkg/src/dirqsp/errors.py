"""Exception hierarchy shared by the library and the command line."""


class DirQSPError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1

    def __init__(self, message, *, stage=None):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


class InputError(DirQSPError, ValueError):
    """Malformed or out-of-contract input."""

    exit_code = 2


class NumericError(DirQSPError, ArithmeticError):
    """A numerical stage failed to meet its accuracy contract."""

    exit_code = 3


class VerificationFailure(DirQSPError, AssertionError):
    """A verified property did not hold within tolerance."""

    exit_code = 4
