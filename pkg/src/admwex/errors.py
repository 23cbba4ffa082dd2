"""
Exception hierarchy shared by the library, the CLI and the MCP server.

Library code raises these; only the entry points translate them into exit
codes or ``{"error": ...}`` payloads.
"""

from typing import Optional

EXIT_OK = 0
EXIT_NEGATIVE = 2
EXIT_INCONCLUSIVE = 3
EXIT_CONFIG = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70


class AdmwexError(Exception):
    """Base class for every error raised by admwex."""

    exit_code = EXIT_INTERNAL


class ConfigError(AdmwexError):
    """The job configuration could not be read or failed validation."""

    exit_code = EXIT_CONFIG


class PreconditionError(AdmwexError):
    """An operation was called with inputs outside its domain."""

    exit_code = EXIT_CONFIG


class ModeMismatchError(PreconditionError):
    """Exact and floating point scalars were mixed in one computation."""


class LogObstructionError(AdmwexError):
    """An exact moment needs a log(t+a) antiderivative with nonzero coefficient."""

    exit_code = EXIT_DATA

    def __init__(self, exponent: int, message: Optional[str] = None):
        self.exponent = exponent
        super().__init__(message or f"exact-mode log obstruction at exponent {exponent}")


class PositivityViolationError(AdmwexError):
    """A supplied test profile violates Θ > 0, Θ(±1) = 0 or Θ'(±1) = ∓2."""

    exit_code = EXIT_DATA


class PoleError(AdmwexError, ZeroDivisionError):
    """A rational function was evaluated at a zero of its denominator."""

    exit_code = EXIT_DATA


class InternalInconsistencyError(AdmwexError):
    """Two code paths disagree, or a quantity that cannot vanish did."""

    exit_code = EXIT_INTERNAL


class ConvergenceError(InternalInconsistencyError):
    """An iterative solver stopped without meeting its tolerance."""

    def __init__(self, message: str, best_residual: float):
        self.best_residual = best_residual
        super().__init__(f"{message} (best residual {best_residual:.3e})")
