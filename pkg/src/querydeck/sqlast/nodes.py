"""Tree model for canonicalized queries.

Nodes are immutable: every edit primitive returns a new tree sharing unchanged
subtrees with the old one, so trees can be hashed, deduplicated and handed to
concurrent readers without copying.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path as _FsPath
from typing import Iterator

from ..errors import IllegalDeletion, MalformedTree, PathNotFound, TypeClash

Path = tuple[int, ...]

#: the grammar catalog is data, not code: tools that only need to know which
#: node types are literals or lists (templating, collection detection, the UI)
#: can read the same file without importing this module.
_CATALOG = json.loads(_FsPath(__file__).with_name("catalog.json").read_text("utf-8"))

#: literal node types and the python type their single ``value`` attribute holds
LITERAL_TYPES: dict[str, type] = {
    name: {"str": str, "int": int, "float": float}[kind]
    for name, kind in _CATALOG["literal_types"].items()
}

#: list node types -> required element node type.  List nodes carry no
#: attributes and hold any number of children of the element type.
#: (Where is the conjunction: each child is one Or disjunction group.)
LIST_TYPES: dict[str, str] = dict(_CATALOG["list_types"])

#: fixed child slots of the root node, in order.  Absent clauses are empty
#: list nodes so that clause indices never shift between queries.
CLAUSE_ORDER: tuple[str, ...] = ("Project", "From", "Where", "GroupBy", "OrderBy", "Limit")

#: fixed arity of non-list interior node types
FIXED_ARITY: dict[str, int] = {
    "Select": len(CLAUSE_ORDER),
    "ProjClause": 1,
    "BiExpr": 2,
    "OrderKey": 1,
    "FuncExpr": 1,
    "ColExpr": 0,
    "TableRef": 0,
}

COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True, slots=True)
class Param:
    """Numbered hole in a template tree, standing in for one attribute value."""

    index: int

    def __repr__(self) -> str:
        return f"${self.index}"


@dataclass(frozen=True, slots=True)
class Node:
    """One AST node: a type tag, an ordered attribute map and ordered children."""

    node_type: str
    attrs: tuple[tuple[str, object], ...] = ()
    children: tuple["Node", ...] = ()

    def attr(self, name: str) -> object | None:
        for key, value in self.attrs:
            if key == name:
                return value
        return None

    @property
    def label(self) -> tuple[str, tuple[tuple[str, object], ...]]:
        """Type plus attributes — the unit of node equality during alignment."""
        return (self.node_type, self.attrs)

    def walk(self, path: Path = ()) -> Iterator[tuple[Path, "Node"]]:
        """Preorder traversal yielding ``(path, node)`` pairs."""
        yield path, self
        for i, child in enumerate(self.children):
            yield from child.walk(path + (i,))

    def size(self) -> int:
        return 1 + sum(child.size() for child in self.children)

    def is_list(self) -> bool:
        return self.node_type in LIST_TYPES

    def is_literal(self) -> bool:
        return self.node_type in LITERAL_TYPES


def node(
    node_type: str,
    attrs: dict[str, object] | tuple[tuple[str, object], ...] | None = None,
    children: tuple[Node, ...] | list[Node] = (),
) -> Node:
    """Convenience constructor normalizing attrs/children into tuples."""
    if attrs is None:
        attr_tuple: tuple[tuple[str, object], ...] = ()
    elif isinstance(attrs, dict):
        attr_tuple = tuple(attrs.items())
    else:
        attr_tuple = tuple(attrs)
    return Node(node_type, attr_tuple, tuple(children))


def parse_path(text: str) -> Path:
    """Parse ``"0/1/0"`` into ``(0, 1, 0)``; the empty string is the root path."""
    if text == "":
        return ()
    try:
        return tuple(int(part) for part in text.split("/"))
    except ValueError:
        raise PathNotFound((), ()) from None


def format_path(path: Path) -> str:
    return "/".join(str(i) for i in path)


def subtree_at(root: Node, path: Path) -> Node:
    """Resolve ``path`` from ``root``; raises :class:`PathNotFound` otherwise."""
    current = root
    for depth, index in enumerate(path):
        if index < 0 or index >= len(current.children):
            raise PathNotFound(tuple(path), tuple(path[:depth]))
        current = current.children[index]
    return current


def substitute(root: Node, path: Path, tau: Node | None, *, insert: bool = False) -> Node:
    """Return a new tree with the subtree at ``path`` edited.

    ``tau`` is the replacement subtree; ``None`` deletes (list parents only).
    ``insert=True`` injects ``tau`` at the addressed index of a list parent
    instead of replacing, appending when the index equals the current length.
    """
    if not path:
        if tau is None:
            raise IllegalDeletion("cannot delete the root node")
        if insert:
            raise IllegalDeletion("cannot insert at the root position")
        return tau
    parent = subtree_at(root, path[:-1])
    index = path[-1]
    limit = len(parent.children) + (1 if insert else 0)
    if index < 0 or index >= limit:
        raise PathNotFound(tuple(path), tuple(path[:-1]))
    if tau is None or insert:
        element = LIST_TYPES.get(parent.node_type)
        if element is None:
            verb = "insert into" if insert else "delete from"
            raise IllegalDeletion(
                f"cannot {verb} {parent.node_type}: not a list node"
            )
        if insert and tau is not None and tau.node_type != element:
            raise TypeClash(
                f"{parent.node_type} holds {element} elements, got {tau.node_type}"
            )
    elif parent.node_type in LIST_TYPES and tau.node_type != LIST_TYPES[parent.node_type]:
        raise TypeClash(
            f"{parent.node_type} holds {LIST_TYPES[parent.node_type]} elements, "
            f"got {tau.node_type}"
        )
    siblings = list(parent.children)
    if tau is None:
        del siblings[index]
    elif insert:
        siblings.insert(index, tau)
    else:
        siblings[index] = tau
    rebuilt = Node(parent.node_type, parent.attrs, tuple(siblings))
    return substitute(root, path[:-1], rebuilt) if len(path) > 1 else rebuilt


def to_json(tree: Node) -> dict:
    """Serialize a tree (template holes included) to plain JSON data.

    Attribute values stay native JSON scalars; a :class:`Param` hole becomes
    ``{"$": index}``, which cannot collide with any real value because
    attribute values are never objects.
    """
    return {
        "type": tree.node_type,
        "attrs": {
            key: {"$": value.index} if isinstance(value, Param) else value
            for key, value in tree.attrs
        },
        "children": [to_json(child) for child in tree.children],
    }


def from_json(data: dict) -> Node:
    """Inverse of :func:`to_json`."""
    try:
        attrs = tuple(
            (key, Param(value["$"]) if isinstance(value, dict) else value)
            for key, value in data["attrs"].items()
        )
        return Node(data["type"], attrs, tuple(from_json(c) for c in data["children"]))
    except (KeyError, TypeError) as exc:
        raise MalformedTree(f"not a serialized tree: {exc}") from None


def validate_tree(root: Node) -> None:
    """Check catalog invariants, raising :class:`MalformedTree` on violation."""
    for path, nd in root.walk():
        where = format_path(path) or "<root>"
        if nd.node_type in LITERAL_TYPES:
            if nd.children:
                raise MalformedTree(f"literal {nd.node_type} at {where} has children")
            if len(nd.attrs) != 1 or nd.attrs[0][0] != "value":
                raise MalformedTree(f"literal {nd.node_type} at {where} needs a single value")
            if not isinstance(nd.attrs[0][1], LITERAL_TYPES[nd.node_type]) or isinstance(
                nd.attrs[0][1], bool
            ):
                raise MalformedTree(f"literal {nd.node_type} at {where} has a foreign value type")
        elif nd.node_type in LIST_TYPES:
            if nd.attrs:
                raise MalformedTree(f"list {nd.node_type} at {where} carries attributes")
            element = LIST_TYPES[nd.node_type]
            for child in nd.children:
                if child.node_type != element:
                    raise MalformedTree(
                        f"list {nd.node_type} at {where} holds {child.node_type}, "
                        f"expected {element}"
                    )
        elif nd.node_type in FIXED_ARITY:
            if len(nd.children) != FIXED_ARITY[nd.node_type]:
                raise MalformedTree(
                    f"{nd.node_type} at {where} has {len(nd.children)} children, "
                    f"expected {FIXED_ARITY[nd.node_type]}"
                )
            if nd.node_type == "Select":
                for slot, child in zip(CLAUSE_ORDER, nd.children):
                    if child.node_type != slot:
                        raise MalformedTree(f"root slot {slot} holds {child.node_type}")
        else:
            raise MalformedTree(f"unknown node type {nd.node_type} at {where}")
