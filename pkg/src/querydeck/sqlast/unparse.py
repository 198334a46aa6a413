"""Deterministic single-line SQL rendering of canonical trees.

The output is the package's canonical text form: uppercase keywords, single
spaces, explicit ORDER BY directions, `!=` for inequality.  ``parse`` composed
with ``canonicalize`` inverts it exactly.
"""
from __future__ import annotations

from ..errors import MalformedTree
from .nodes import Node, validate_tree


def unparse(root: Node) -> str:
    validate_tree(root)
    project, from_, where, group, order, limit = root.children
    if not project.children:
        raise MalformedTree("a query needs at least one projection")
    if not from_.children:
        raise MalformedTree("a query needs at least one table")
    parts = [
        "SELECT " + ", ".join(_proj(c) for c in project.children),
        "FROM " + ", ".join(str(t.attr("name")) for t in from_.children),
    ]
    if where.children:
        parts.append("WHERE " + " AND ".join(_group(g) for g in where.children))
    if group.children:
        parts.append("GROUP BY " + ", ".join(str(c.attr("name")) for c in group.children))
    if order.children:
        parts.append("ORDER BY " + ", ".join(_order_key(k) for k in order.children))
    if limit.children:
        parts.append("LIMIT " + str(limit.children[0].attr("value")))
    return " ".join(parts)


def unparse_fragment(tree: Node) -> str:
    """Render any subtree (used by diff output and widget labels)."""
    kind = tree.node_type
    if kind == "Select":
        return unparse(tree)
    if kind == "ColExpr" or kind == "TableRef":
        return str(tree.attr("name"))
    if kind == "StrExpr":
        return "'" + str(tree.attr("value")).replace("'", "''") + "'"
    if kind == "IntExpr":
        return str(tree.attr("value"))
    if kind == "FloatExpr":
        return repr(tree.attr("value"))
    if kind == "FuncExpr":
        return f"{tree.attr('name')}({unparse_fragment(tree.children[0])})"
    if kind == "ProjClause":
        return _proj(tree)
    if kind == "BiExpr":
        return _predicate(tree)
    if kind == "Or":
        return _group(tree)
    if kind == "Where":
        return " AND ".join(_group(g) for g in tree.children)
    if kind == "OrderKey":
        return _order_key(tree)
    if kind == "Project":
        return ", ".join(_proj(c) for c in tree.children)
    if kind == "From":
        return ", ".join(str(t.attr("name")) for t in tree.children)
    if kind == "GroupBy":
        return ", ".join(str(c.attr("name")) for c in tree.children)
    if kind == "OrderBy":
        return ", ".join(_order_key(k) for k in tree.children)
    if kind == "Limit":
        return str(tree.children[0].attr("value")) if tree.children else ""
    raise MalformedTree(f"cannot render node type {kind}")


def _proj(clause: Node) -> str:
    if clause.children[0].node_type == "ProjClause":
        raise MalformedTree("nested projection clause")
    text = unparse_fragment(clause.children[0])
    alias = clause.attr("alias")
    return f"{text} AS {alias}" if alias is not None else text


def _predicate(pred: Node) -> str:
    left, right = pred.children
    return f"{unparse_fragment(left)} {pred.attr('op')} {unparse_fragment(right)}"


def _group(group: Node) -> str:
    rendered = [_predicate(p) for p in group.children]
    if not rendered:
        raise MalformedTree("empty disjunction group")
    if len(rendered) == 1:
        return rendered[0]
    return "(" + " OR ".join(rendered) + ")"


def _order_key(key: Node) -> str:
    direction = str(key.attr("dir") or "asc").upper()
    return f"{key.children[0].attr('name')} {direction}"
