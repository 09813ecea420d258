"""
canon-szego — Errors
Exception hierarchy shared by every tool and mapped to CLI exit codes.
"""

from typing import Optional


class CanonSzegoError(Exception):
    """Base class for every error raised by the tools package."""

    exit_code = 4


class SpecError(CanonSzegoError, ValueError):
    """
    Malformed input: bad JSON, a missing field, a value of the wrong kind.

    Args:
        message: human readable diagnostic
        field: JSON path of the offending value, e.g. ``pieces[2].h12``
        line: 1-based line number in the input file, when known
    """

    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(f"{prefix}{message}")


class ValidationError(SpecError):
    """Structural violation of a Hamiltonian, weight or string."""


class HypothesisError(CanonSzegoError):
    """The input lies outside the class a computation is defined on."""

    exit_code = 3

    def __init__(self, message: str, hypothesis: str = ""):
        self.hypothesis = hypothesis or message
        super().__init__(message)


class HorizonError(CanonSzegoError):
    """The Weyl disk iteration hit its horizon cap before reaching tolerance."""

    def __init__(self, message: str, point: complex, radius: float, t: float):
        self.point = point
        self.radius = radius
        self.t = t
        super().__init__(f"{message} (best point {point}, radius {radius:.3e} at t={t:g})")


class UnsupportedError(CanonSzegoError):
    """Operation is not defined for this input class."""


class ConfigError(CanonSzegoError, ValueError):
    """Bad configuration value."""

    exit_code = 2
