"""Exception hierarchy shared across the package.

Everything user-facing raises a subclass of :class:`QueryDeckError` so the CLI
and the HTTP service can map failures onto exit codes / status codes in one
place.
"""
from __future__ import annotations


class QueryDeckError(Exception):
    """Base class for all errors raised by this package."""


class SqlSyntaxError(QueryDeckError):
    """Raised when SQL text cannot be tokenized or parsed.

    Carries the 1-based ``line`` and ``column`` of the offending token.
    """

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnsupportedConstruct(QueryDeckError):
    """Syntactically valid SQL that falls outside the supported subset."""


class MalformedTree(QueryDeckError):
    """An AST violates a structural invariant (bad arity, literal with children, ...)."""


class PathNotFound(QueryDeckError):
    """A tree path does not resolve; ``longest_prefix`` is the part that did."""

    def __init__(self, path: tuple[int, ...], longest_prefix: tuple[int, ...]) -> None:
        pretty = "/".join(str(i) for i in path) or "<root>"
        held = "/".join(str(i) for i in longest_prefix) or "<root>"
        super().__init__(f"path {pretty} does not resolve (longest resolvable prefix: {held})")
        self.path = path
        self.longest_prefix = longest_prefix


class IllegalDeletion(QueryDeckError):
    """Deletion or insertion addressed a child of a non-list node."""


class TypeClash(QueryDeckError):
    """A substitution would break a list node's homogeneous element type."""


class PilangSyntaxError(QueryDeckError):
    """Raised when a statement file cannot be parsed."""


class UnboundVariable(QueryDeckError):
    """A statement predicate or MATCH clause references an undeclared variable."""


class EmptySample(QueryDeckError):
    """Statement suggestion was asked to sample from an unusable log."""


class NonTransitiveStatement(QueryDeckError):
    """A clique routine was handed a statement that fails the transitivity check."""


class HeterogeneousGroup(QueryDeckError):
    """Widget-template extraction received records with differing shapes."""


class NoCandidate(QueryDeckError):
    """No widget type can express a value domain (should be unreachable)."""


class WeightMismatch(QueryDeckError):
    """Cost evaluation got weight vectors of the wrong arity."""


class CoverageUnreachable(QueryDeckError):
    """The requested coverage threshold cannot be met; carries the achievable value."""

    def __init__(self, requested: float, achievable: float) -> None:
        super().__init__(
            f"requested coverage {requested:.3f} unreachable (achievable: {achievable:.3f})"
        )
        self.requested = requested
        self.achievable = achievable


class DomainViolation(QueryDeckError):
    """A widget received a value outside its domain."""

    def __init__(self, widget_id: str, value: object) -> None:
        super().__init__(f"value {value!r} not in domain of widget {widget_id}")
        self.widget_id = widget_id
        self.value = value


class ConfigError(QueryDeckError):
    """Invalid generator or pipeline configuration."""
