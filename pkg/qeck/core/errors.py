"""
Exception hierarchy.

Every failure that is not a verdict derives from QeckError; the CLI maps
them all to exit status 2.
"""

from __future__ import annotations

from typing import NamedTuple


class Location(NamedTuple):
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class QeckError(Exception):
    def __init__(self, message: str, location: Location | None = None) -> None:
        self.message = message
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


# ── Language front-end ────────────────────────────────────────────────────────

class LexError(QeckError):
    pass


class ParseError(QeckError):
    def __init__(self, message: str, location: Location | None = None,
                 token: str = "", expected: str = "") -> None:
        self.token = token
        self.expected = expected
        super().__init__(message, location)


class ValidationError(QeckError):
    def __init__(self, rule: str, message: str, location: Location | None = None) -> None:
        self.rule = rule
        super().__init__(message, location)


# ── Stabilizer core ───────────────────────────────────────────────────────────

class OperandError(QeckError):
    pass


class DimensionError(QeckError):
    pass


class InvariantError(QeckError):
    pass


# ── Scheduler ─────────────────────────────────────────────────────────────────

class DeadlockError(QeckError):
    def __init__(self, message: str, heads: list[str] | None = None) -> None:
        self.heads = heads or []
        super().__init__(message)


class ResourceError(QeckError):
    pass


class ModeError(QeckError):
    pass


class OutcomeError(QeckError):
    pass


# ── Equivalence / oracle ──────────────────────────────────────────────────────

class SeparabilityError(QeckError):
    pass


class CapacityError(QeckError):
    pass
