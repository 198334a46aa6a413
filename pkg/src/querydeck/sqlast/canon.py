"""Normalization pass: raw parse trees -> canonical trees.

The WHERE clause is rewritten into conjunctive normal form: the Where list
node holds one Or list node per conjunct, and each Or node holds plain
comparison predicates.  NOT is pushed down onto comparisons (flipping the
operator), BETWEEN desugars into a pair of bound predicates, and nested
And/Or trees are flattened.  Conjunct and disjunct order is preserved as
written — no sorting or deduplication — so canonicalization is deterministic
and idempotent.
"""
from __future__ import annotations

from ..errors import MalformedTree
from .nodes import Node, node

_NEGATED_OP = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


def canonicalize(root: Node) -> Node:
    if root.node_type != "Select" or len(root.children) != 6:
        raise MalformedTree("canonicalize expects a Select root with six clause slots")
    where = root.children[2]
    groups: list[Node] = []
    for conjunct in where.children:
        groups.extend(node("Or", None, g) for g in _cnf(conjunct))
    new_where = node("Where", None, groups)
    children = list(root.children)
    children[2] = new_where
    return Node(root.node_type, root.attrs, tuple(children))


def _cnf(tree: Node) -> list[list[Node]]:
    """Return a conjunction (outer list) of disjunctions (inner lists) of predicates."""
    kind = tree.node_type
    if kind == "BiExpr":
        return [[tree]]
    if kind == "Between":
        col, lo, hi = tree.children
        return [
            [node("BiExpr", {"op": ">="}, (col, lo))],
            [node("BiExpr", {"op": "<="}, (col, hi))],
        ]
    if kind == "And":
        out: list[list[Node]] = []
        for child in tree.children:
            out.extend(_cnf(child))
        return out
    if kind == "Or":
        # distribute: cross product of the children's conjunctions, left-major
        result: list[list[Node]] = [[]]
        for child in tree.children:
            child_cnf = _cnf(child)
            result = [left + right for left in result for right in child_cnf]
        return result
    if kind == "Not":
        return _cnf(_negate(tree.children[0]))
    raise MalformedTree(f"unexpected node {kind} inside WHERE")


def _negate(tree: Node) -> Node:
    kind = tree.node_type
    if kind == "BiExpr":
        op = tree.attr("op")
        return node("BiExpr", {"op": _NEGATED_OP[str(op)]}, tree.children)
    if kind == "Between":
        col, lo, hi = tree.children
        return node("Or", None, (
            node("BiExpr", {"op": "<"}, (col, lo)),
            node("BiExpr", {"op": ">"}, (col, hi)),
        ))
    if kind == "And":
        return node("Or", None, tuple(_negate(c) for c in tree.children))
    if kind == "Or":
        return node("And", None, tuple(_negate(c) for c in tree.children))
    if kind == "Not":
        return tree.children[0]
    raise MalformedTree(f"unexpected node {kind} inside WHERE")
