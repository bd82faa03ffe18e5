#!/usr/bin/env python3
"""
Exceptions Module

This module defines the error hierarchy shared by every Siegel pipeline.
Each error carries an optional remediation hint which is appended to the
message, so a failure tells the user what to run or change next.

Key Features:
- DomainError family (CLI exit code 2)
- ResourceExhausted family (CLI exit code 3)
- InvariantViolation / Disqualified for bugs and misbehaving strategies

Usage:
    raise DomainError("Rational rotation number", hint="Use a tail such as 1* or 2*.")
"""


class SiegelError(Exception):
    """
    Base class for all Siegel errors.

    Attributes:
        hint (str): Optional remediation advice appended to the message
        exit_code (int): Process exit code used by the CLI
    """

    exit_code = 1

    def __init__(self, message, hint=None):
        self.hint = hint
        if hint:
            message = f"{message}. {hint}"
        super().__init__(message)


class DomainError(SiegelError):
    """Input outside the domain of the requested operation."""

    exit_code = 2


class LevelTooCoarse(DomainError):
    """The carved domain lost the marked point 0 at this level."""


class MalformedCertificate(DomainError):
    """Certificate document is missing fields or has the wrong shape."""


class ResourceExhausted(SiegelError):
    """An iteration, candidate or work cap was reached before success."""

    exit_code = 3

    def __init__(self, message, hint=None, log=None):
        super().__init__(message, hint=hint)
        self.log = list(log or [])


class PrecisionExhausted(ResourceExhausted):
    """Precision doubling hit SIEGEL_PRECISION_CAP."""


class BudgetExhausted(ResourceExhausted):
    """A metered computation ran out of work units."""


class InvariantViolation(SiegelError):
    """A proven property failed; indicates an implementation bug."""


class Disqualified(SiegelError):
    """A strategy broke its contract (for example overran its budget)."""
