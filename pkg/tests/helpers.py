"""Shared tree builders for the test suite."""
from __future__ import annotations

import random

from querydeck.sqlast import Node, node


def col(name: str) -> Node:
    return node("ColExpr", {"name": name})


def table(name: str) -> Node:
    return node("TableRef", {"name": name})


def s(value: str) -> Node:
    return node("StrExpr", {"value": value})


def i(value: int) -> Node:
    return node("IntExpr", {"value": value})


def f(value: float) -> Node:
    return node("FloatExpr", {"value": value})


def bi(op: str, left: Node, right: Node) -> Node:
    return node("BiExpr", {"op": op}, (left, right))


def group(*preds: Node) -> Node:
    return node("Or", None, preds)


def pc(expr: Node, alias: str | None = None) -> Node:
    attrs = {"alias": alias} if alias is not None else None
    return node("ProjClause", attrs, (expr,))


def func(name: str, column: Node) -> Node:
    return node("FuncExpr", {"name": name}, (column,))


def okey(column: Node, direction: str = "asc") -> Node:
    return node("OrderKey", {"dir": direction}, (column,))


def select(
    projs: list[Node],
    tables: list[Node],
    where: list[Node] | None = None,
    group_by: list[Node] | None = None,
    order_by: list[Node] | None = None,
    limit: int | None = None,
) -> Node:
    return node("Select", None, (
        node("Project", None, projs),
        node("From", None, tables),
        node("Where", None, where or []),
        node("GroupBy", None, group_by or []),
        node("OrderBy", None, order_by or []),
        node("Limit", None, [i(limit)] if limit is not None else []),
    ))


def fig_pair() -> tuple[Node, Node]:
    """The canonical two-query example used across the suite."""
    q1 = select(
        [pc(col("date"), "x"), pc(col("sales"), "y")],
        [table("sales")],
        where=[group(bi("=", col("cty"), s("USA")))],
    )
    q2 = select(
        [pc(col("date"), "x"), pc(col("costs"), "y")],
        [table("sales")],
        where=[group(bi("=", col("cty"), s("EUR")))],
    )
    return q1, q2


FIG_SQL_1 = "SELECT date AS x, sales AS y FROM sales WHERE cty = 'USA'"
FIG_SQL_2 = "SELECT date AS x, costs AS y FROM sales WHERE cty = 'EUR'"

_NAMES = ["a", "b", "c", "dep", "arr", "sales", "cty", "delay", "price", "origin"]
_TABLES = ["t", "sales", "ontime", "orders"]
_AGGS = ["avg", "sum", "count", "min", "max"]
_STRINGS = ["USA", "EUR", "NY", "LA", "O'Hare", "", "x y"]


def random_value_expr(rng: random.Random) -> Node:
    kind = rng.randrange(4)
    if kind == 0:
        return func(rng.choice(_AGGS), col(rng.choice(_NAMES)))
    if kind == 1:
        return random_literal(rng)
    return col(rng.choice(_NAMES))


def random_literal(rng: random.Random) -> Node:
    kind = rng.randrange(3)
    if kind == 0:
        return s(rng.choice(_STRINGS))
    if kind == 1:
        return i(rng.randrange(-5, 100))
    return f(rng.choice([0.5, 1.25, 12.0, 3.75]))


def random_predicate(rng: random.Random) -> Node:
    op = rng.choice(["=", "!=", "<", "<=", ">", ">="])
    right = random_literal(rng) if rng.random() < 0.8 else col(rng.choice(_NAMES))
    return bi(op, col(rng.choice(_NAMES)), right)


_ELEMENT_MAKERS = {
    "Or": lambda rng: random_predicate(rng),
    "Project": lambda rng: pc(random_value_expr(rng)),
    "Where": lambda rng: group(random_predicate(rng)),
    "GroupBy": lambda rng: col(rng.choice(_NAMES)),
    "OrderBy": lambda rng: okey(col(rng.choice(_NAMES)), rng.choice(["asc", "desc"])),
    "From": lambda rng: table(rng.choice(_TABLES)),
    "Limit": lambda rng: i(rng.randrange(500)),
}


def random_fragment(rng: random.Random, max_nodes: int = 12) -> Node:
    """A small list-rooted subtree — the interesting domain for alignment."""
    while True:
        kind = rng.randrange(3)
        if kind == 0:
            t = group(*[random_predicate(rng) for _ in range(rng.randrange(1, 5))])
        elif kind == 1:
            t = node("Project", None, [
                pc(random_value_expr(rng), rng.choice([None, "x"]))
                for _ in range(rng.randrange(1, 5))
            ])
        else:
            t = node("Where", None, [
                group(*[random_predicate(rng) for _ in range(rng.randrange(1, 3))])
                for _ in range(rng.randrange(0, 4))
            ])
        if t.size() <= max_nodes:
            return t


def mutate(rng: random.Random, tree: Node, edits: int = 1) -> Node:
    """Apply ``edits`` random local changes (literal/name rewrites, list ins/del)."""
    from querydeck.sqlast import substitute as subst

    for _ in range(edits):
        spots = list(tree.walk())
        for _ in range(30):
            path, nd = spots[rng.randrange(len(spots))]
            if nd.node_type in ("StrExpr", "IntExpr", "FloatExpr"):
                fresh = {
                    "StrExpr": lambda: s(rng.choice(_STRINGS)),
                    "IntExpr": lambda: i(rng.randrange(-5, 500)),
                    "FloatExpr": lambda: f(rng.choice([0.5, 1.25, 12.0, 3.75])),
                }[nd.node_type]()
                tree = subst(tree, path, fresh) if path else fresh
                break
            if nd.node_type == "ColExpr":
                replacement = col(rng.choice(_NAMES))
                tree = subst(tree, path, replacement) if path else replacement
                break
            maker = _ELEMENT_MAKERS.get(nd.node_type)
            if maker is not None:
                if nd.children and rng.random() < 0.5:
                    tree = subst(tree, path + (rng.randrange(len(nd.children)),), None)
                else:
                    idx = rng.randrange(len(nd.children) + 1)
                    tree = subst(tree, path + (idx,), maker(rng), insert=True)
                break
    return tree


def random_query(rng: random.Random) -> Node:
    projs = [
        pc(random_value_expr(rng), rng.choice([None, rng.choice(_NAMES)]))
        for _ in range(rng.randrange(1, 4))
    ]
    tables = [table(rng.choice(_TABLES)) for _ in range(rng.randrange(1, 3))]
    where = [
        group(*[random_predicate(rng) for _ in range(rng.randrange(1, 4))])
        for _ in range(rng.randrange(0, 4))
    ]
    group_by = [col(rng.choice(_NAMES)) for _ in range(rng.randrange(0, 3))]
    order_by = [
        okey(col(rng.choice(_NAMES)), rng.choice(["asc", "desc"]))
        for _ in range(rng.randrange(0, 3))
    ]
    limit = rng.randrange(0, 500) if rng.random() < 0.3 else None
    return select(projs, tables, where, group_by, order_by, limit)
