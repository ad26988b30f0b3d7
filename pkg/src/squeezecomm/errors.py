"""Exception types shared across the package.

The CLI maps these onto exit codes: validation/domain/configuration problems
exit with 2, numerical non-convergence with 3.
"""


class SqueezeCommError(Exception):
    """Base class for all package errors."""


class ValidationError(SqueezeCommError, ValueError):
    """An input object violates its invariants (normalization, shape, ...)."""


class DomainError(SqueezeCommError, ValueError):
    """A scalar argument lies outside the domain of the operation."""


class ConfigurationError(SqueezeCommError, ValueError):
    """Required options are missing or inconsistent."""


class ConvergenceError(SqueezeCommError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance.

    ``last_value`` is the final iterate of the quantity being solved for and
    ``gap_bound`` an upper bound on its remaining error (same units).
    """

    def __init__(self, message, last_value=None, gap_bound=None):
        super().__init__(message)
        self.last_value = last_value
        self.gap_bound = gap_bound
