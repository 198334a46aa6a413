"""Query tree core: parsing, canonicalization, rendering and tree edits."""
from .canon import canonicalize
from .nodes import (
    CLAUSE_ORDER,
    COMPARISON_OPS,
    FIXED_ARITY,
    LIST_TYPES,
    LITERAL_TYPES,
    Node,
    Param,
    Path,
    format_path,
    from_json,
    node,
    parse_path,
    substitute,
    subtree_at,
    to_json,
    validate_tree,
)
from .parser import parse, parse_fragment
from .unparse import unparse, unparse_fragment


def parse_canonical(text: str) -> Node:
    """Parse SQL text straight into canonical form."""
    return canonicalize(parse(text))


__all__ = [
    "CLAUSE_ORDER",
    "COMPARISON_OPS",
    "FIXED_ARITY",
    "LIST_TYPES",
    "LITERAL_TYPES",
    "Node",
    "Param",
    "Path",
    "canonicalize",
    "format_path",
    "from_json",
    "node",
    "parse",
    "parse_canonical",
    "parse_fragment",
    "parse_path",
    "substitute",
    "subtree_at",
    "to_json",
    "unparse",
    "unparse_fragment",
    "validate_tree",
]
