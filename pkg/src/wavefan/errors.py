"""Exception types shared across the package.

Every failure mode raised by the solvers and checks is a subclass of
WavefanError, so callers can catch one base type at the CLI boundary and
still discriminate programmatically everywhere else.
"""

from __future__ import annotations


class WavefanError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(WavefanError, ValueError):
    """A scalar argument or option is outside its documented range."""


class UnsupportedFluxError(WavefanError, ValueError):
    """An operation that only makes sense for the quadratic flux got another one."""


class NonConvergenceError(WavefanError, RuntimeError):
    """Newton (or a continuation stage) failed to converge.

    Carries the partial solve report (and the failing epsilon for sweeps)
    so callers can inspect the residual history.
    """

    def __init__(self, message, report=None, epsilon=None):
        super().__init__(message)
        self.report = report
        self.epsilon = epsilon


class LinearSolverError(WavefanError, RuntimeError):
    """The tridiagonal Newton system was singular or produced non-finite values."""


class IntegrationError(WavefanError, RuntimeError):
    """The adaptive ODE integrator gave up (step-size underflow etc.)."""


class CoverageError(WavefanError, ValueError):
    """A check needed samples outside the range the given data covers."""


class WindowError(WavefanError, ValueError):
    """A fit or integration window is empty, reversed, or has too few nodes."""


class DegenerateProfileError(WavefanError, ValueError):
    """A profile violates a structural assumption (e.g. a zero slope where
    a logarithm of the slope is required)."""


class InconclusiveProbeError(WavefanError, RuntimeError):
    """Too few probe runs converged to say anything about uniqueness."""


class ProfileFormatError(WavefanError, ValueError):
    """A profile CSV (or config file) failed to parse; message carries the line number."""


class ConfigError(WavefanError, ValueError):
    """Command line or config file rejected; message names the offending token."""
