"""Exception types shared by the package and mapped to CLI exit codes."""


class PolycapError(Exception):
    """Base class for package errors."""


class ValidationError(PolycapError, ValueError):
    """Input violates a documented precondition (CLI exit code 2)."""


class BudgetError(PolycapError):
    """Requested work exceeds a configured budget cap (CLI exit code 3)."""


class NumericalError(PolycapError, ArithmeticError):
    """A numerical procedure failed or produced an inconsistent value (exit code 1)."""
