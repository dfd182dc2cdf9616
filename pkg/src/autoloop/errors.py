"""Exception hierarchy shared by every module of the package."""


class AutoloopError(Exception):
    """Base class; the CLI maps every subclass to exit code 1."""

    code = "Error"

    def __init__(self, message="", witness=None):
        super().__init__(message)
        self.witness = witness


class NonPrime(AutoloopError, ValueError):
    code = "NonPrime"


class NotIrreducible(AutoloopError, ValueError):
    code = "NotIrreducible"


class DivisionByZero(AutoloopError, ZeroDivisionError):
    code = "DivisionByZero"


class Singular(AutoloopError, ZeroDivisionError):
    code = "Singular"


class NotLatin(AutoloopError, ValueError):
    code = "NotLatin"


class NoIdentity(AutoloopError, ValueError):
    code = "NoIdentity"


class NotCommuting(AutoloopError, ValueError):
    code = "NotCommuting"


class NotInvertible(AutoloopError, ValueError):
    code = "NotInvertible"


class TrivialIntersection(AutoloopError, ValueError):
    """Raised when W meets the prime field k1 nontrivially."""

    code = "TrivialIntersection"


class InvalidParam(AutoloopError, ValueError):
    code = "InvalidParam"


class TooLarge(AutoloopError, ValueError):
    code = "TooLarge"


class NotTame(AutoloopError, ValueError):
    code = "NotTame"


class NotInS(AutoloopError, ValueError):
    code = "NotInS"


class NotIso(AutoloopError, ValueError):
    code = "NotIso"


class ScalarMatrix(AutoloopError, ValueError):
    code = "ScalarMatrix"


class NotAnisotropic(AutoloopError, ValueError):
    code = "NotAnisotropic"


class BudgetExceeded(AutoloopError, RuntimeError):
    """Carries whatever was computed before the budget ran out in ``partial``."""

    code = "BudgetExceeded"

    def __init__(self, message="", partial=None):
        super().__init__(message)
        self.partial = partial


class FormatVersionUnsupported(AutoloopError, ValueError):
    code = "FormatVersionUnsupported"


class ValidationFailed(AutoloopError, ValueError):
    code = "ValidationFailed"

    def __init__(self, message="", cause=None):
        super().__init__(message)
        self.cause = cause
