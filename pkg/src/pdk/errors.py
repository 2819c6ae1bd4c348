"""Error types shared across the toolkit."""

from __future__ import annotations


class PdkError(Exception):
    """Base class for toolkit errors."""


class ValidationError(PdkError):
    """A system failed validation; carries the offending report."""

    def __init__(self, message: str, issues=None):
        super().__init__(message)
        self.issues = list(issues or [])


class PreconditionViolation(PdkError):
    """An operation was called on inputs violating its contract.

    Carries optional witness ids so callers (and the CLI, exit code 3) can
    point at the offending disks.
    """

    def __init__(self, message: str, witnesses=()):
        super().__init__(message)
        self.witnesses = tuple(witnesses)


class OracleLimitError(PdkError):
    """Brute-force oracle asked to handle an instance above its guard."""
