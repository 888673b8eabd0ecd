"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical failures with 3.
"""


class FolocError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(FolocError):
    """Invalid dimensions, options, or input files."""


class NumericalError(FolocError):
    """A computation produced non-finite or untrustworthy results.

    When raised from an iterative solver, ``last_iterate`` carries the
    most recent iterate so callers can inspect how the run diverged.
    """

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class IllConditionedError(NumericalError):
    """A linear system was too close to singular to solve reliably."""
