"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """1-based location of a token in model or formula text."""

    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError(f"invalid span {self.line}:{self.column}")

    def covers(self, line: int, column: int) -> bool:
        return self.line == line and self.column <= column < self.column + max(self.length, 1)

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class KmcError(Exception):
    """Base class for every error raised by this package."""


class SourceError(KmcError):
    """An error tied to a location in source text."""

    def __init__(self, span: SourceSpan | None, message: str):
        if not message:
            raise ValueError("error message must be non-empty")
        self.span = span
        self.message = message
        super().__init__(str(self))

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span is not None else ""
        return f"{where}{self.message}"


class ParseError(SourceError):
    """Lexical or syntactic error. ``expected`` summarizes acceptable tokens."""

    def __init__(self, span: SourceSpan | None, message: str, expected: str = ""):
        self.expected = expected
        super().__init__(span, message)

    def __str__(self) -> str:
        text = super().__str__()
        if self.expected:
            text += f" (expected {self.expected})"
        return text


class ValidationError(SourceError):
    """Name resolution, typing or domain error in an otherwise well-formed model."""


class UnresolvedVariable(KmcError):
    def __init__(self, agent: str, name: str):
        self.agent = agent
        self.name = name
        super().__init__(f"unresolved variable {agent}.{name}")


class DomainViolation(KmcError):
    """An assignment produced a value outside the target variable's domain."""

    def __init__(self, agent: str, name: str, value, state=None):
        self.agent = agent
        self.name = name
        self.value = value
        self.state = state
        msg = f"value {value!r} assigned to {agent}.{name} is outside its domain"
        if state is not None:
            msg += f" (in state {state})"
        super().__init__(msg)


class StateLimitExceeded(KmcError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"state limit of {limit} reachable states exceeded")


class UnsupportedFragment(KmcError):
    """No counterexample generator exists for this formula shape."""
