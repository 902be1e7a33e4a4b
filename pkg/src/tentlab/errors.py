"""Exception types mapped onto CLI exit codes."""


class GuardError(ValueError):
    """A hypothesis or precondition was violated (exit code 1)."""


class ConvergenceError(ArithmeticError):
    """A numerical routine failed to converge (exit code 2)."""


class CertificateError(ArithmeticError):
    """A certificate check missed its bound (exit code 2)."""


class FieldFileError(OSError):
    """Malformed or unreadable field file (exit code 3)."""
