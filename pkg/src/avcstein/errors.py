"""Exception types shared across the package.

Exit-code mapping used by the CLI: validation errors exit 2, solver
non-convergence exits 3, enumeration budget overruns exit 4.
"""


class AvcsteinError(Exception):
    """Base class for package errors."""

    exit_code = 1


class PairValidationError(AvcsteinError):
    """Raised when a channel pair or distribution violates its invariants."""

    exit_code = 2

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ConvergenceError(AvcsteinError):
    """Raised when an iterative solver fails to reach its tolerance."""

    exit_code = 3


class BudgetExceededError(AvcsteinError):
    """Raised when an enumeration would exceed the configured budget."""

    exit_code = 4


class CodebookError(ConvergenceError):
    """Raised when codebook generation exhausts its attempts.

    Carries the check report of the best (least violating) attempt.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
