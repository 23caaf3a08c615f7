"""Exception types shared across the package.

The CLI maps ``ParameterError`` (and I/O problems) to exit code 2 and
``NumericalError`` to exit code 3.
"""


class ParameterError(ValueError):
    """Invalid or inconsistent user-supplied parameters."""


class NumericalError(RuntimeError):
    """A computation failed numerically (singular system, non-convergence)."""
