"""Evaluation of filter statements over diff tables.

A diff record sits at the bottom of a *node chain*: position 0 is the query
root, position ``L = len(record.path)`` is the edited node itself, and the
positions in between are ancestors matched one-to-one across the two trees.
A binding's path expression walks that chain in whichever tree holds the
node (source for deletions, target for insertions, either for
substitutions); the deepest landing position becomes the bound subtree pair.

``eval_statement`` is all-or-nothing: a statement matches a diff table only
when every record is reachable by some binding, at least one tuple of lifted
rows satisfies the predicate, and the surviving tuples still touch every
record.  Anything less returns ``None``.
"""
from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass

from ..diff import DiffRecord, DiffTable
from ..sqlast import Node, Path, subtree_at
from .ast import (
    BoolOp,
    Comparison,
    Literal,
    NavRef,
    NotOp,
    NullTest,
    PathExpr,
    Predicate,
    Statement,
    Step,
)

__all__ = [
    "LiftedRow",
    "MatchRecord",
    "MatchTable",
    "match_pathexpr",
    "match_record",
    "lift",
    "evaluate_predicate",
    "eval_statement",
    "is_transitive",
    "is_symmetric",
    "depends_on_literals",
]

log = logging.getLogger(__name__)
_warned_attrs: set[tuple[str, str]] = set()

_MISSING = object()      # navigation dead-end or absent edit side
_ABSENT_ATTR = object()  # resolved node lacks the requested attribute


def _path2_of(record: DiffRecord) -> Path:
    """Target-side path: full for substitutions/insertions, parent for deletions."""
    if record.path2 is not None:
        return record.path2
    return record.path if record.tau2 is not None else record.path[:-1]


@dataclass(frozen=True, slots=True)
class LiftedRow:
    """One record bound at chain position ``depth``.

    ``tau1``/``path`` address the source tree and ``tau2``/``path2`` the
    target tree; the side a record lacks (inserted nodes have no source,
    deleted nodes no target) stays ``None`` when bound at the record itself.
    For an insertion bound at the record, ``path`` is the textual anchor from
    the record rather than a resolvable source-tree path.
    """

    record: DiffRecord
    depth: int
    tau1: Node | None
    tau2: Node | None
    path: Path
    path2: Path | None


@dataclass(frozen=True, slots=True)
class MatchRecord:
    """One diff record claimed by a binding variable."""

    statement: str
    did: int
    var: str
    row: LiftedRow

    @property
    def tau1(self) -> Node | None:
        return self.row.tau1

    @property
    def tau2(self) -> Node | None:
        return self.row.tau2

    @property
    def path(self) -> Path:
        return self.row.path

    @property
    def pid1(self) -> str:
        return self.row.record.pid1

    @property
    def pid2(self) -> str:
        return self.row.record.pid2


@dataclass(frozen=True, slots=True)
class MatchTable:
    """Successful evaluation of one statement over one diff table."""

    statement: str
    pid1: str
    pid2: str
    records: tuple[MatchRecord, ...]

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def match_pathexpr(expr: PathExpr, path: Path, ast: Node) -> Path | None:
    """Deepest node on the root-to-``path`` chain whose type sequence
    satisfies ``expr``, or ``None``.

    ``//`` tolerates any gap, ``/`` demands a direct child; ``type[i]``
    selects the i-th child of that type within its parent, ``*[i]`` the i-th
    child overall.
    """
    chain: list[Node] = [ast]
    for index in path:
        chain.append(chain[-1].children[index])
    top = len(path)

    def fits(step: Step, d: int) -> bool:
        node = chain[d]
        if step.node_type is not None and node.node_type != step.node_type:
            return False
        if step.index is None:
            return True
        if d == 0:
            return False  # the root is nobody's child
        parent, raw = chain[d - 1], path[d - 1]
        if step.node_type is None:
            return raw == step.index
        same_typed_before = sum(
            1 for child in parent.children[:raw] if child.node_type == node.node_type
        )
        return same_typed_before == step.index

    first = expr.steps[0]
    if first.axis == "root":
        current = {0} if fits(first, 0) else set()
    else:
        current = {d for d in range(top + 1) if fits(first, d)}
    for step in expr.steps[1:]:
        if not current:
            return None
        if step.axis == "child":
            current = {d + 1 for d in current if d + 1 <= top and fits(step, d + 1)}
        else:
            lo = min(current)
            current = {d for d in range(lo + 1, top + 1) if fits(step, d)}
    return path[: max(current)] if current else None


def match_record(expr: PathExpr, record: DiffRecord,
                 ast1: Node, ast2: Node) -> int | None:
    """Deepest chain position ``expr`` reaches for this record, over both
    sides of the edit."""
    best: int | None = None
    if record.tau1 is not None:
        found = match_pathexpr(expr, record.path, ast1)
        if found is not None:
            best = len(found)
    if record.tau2 is not None:
        found = match_pathexpr(expr, _path2_of(record), ast2)
        if found is not None and (best is None or len(found) > best):
            best = len(found)
    return best


def lift(record: DiffRecord, depth: int, ast1: Node, ast2: Node) -> LiftedRow:
    """Bind ``record`` at chain position ``depth``."""
    if depth == len(record.path):
        path2 = _path2_of(record) if record.tau2 is not None else None
        return LiftedRow(record, depth, record.tau1, record.tau2, record.path, path2)
    path = record.path[:depth]
    path2 = _path2_of(record)[:depth]
    return LiftedRow(record, depth, subtree_at(ast1, path), subtree_at(ast2, path2), path, path2)


# -- predicate evaluation (three-valued: True / False / None for unknown) ----

def _resolve(ref: NavRef, env: dict[str, LiftedRow], ast1: Node, ast2: Node):
    """Follow a navigation reference to a value, a node, or a sentinel."""
    row = env[ref.var]
    if ref.side == "t1":
        node, path, tree = row.tau1, row.path, ast1
    else:
        node, path, tree = row.tau2, row.path2, ast2
    if node is None:
        return _MISSING
    for step in ref.steps:
        if step.kind == "parent":
            if not path:
                return _MISSING
            path = path[:-1]
            node = subtree_at(tree, path)
            continue
        found = [(k, c) for k, c in enumerate(node.children)
                 if step.node_type is None or c.node_type == step.node_type]
        pos = step.index if step.index is not None else 0
        if pos >= len(found):
            return _MISSING
        k, node = found[pos]
        path = path + (k,)
    if ref.attr is None:
        return node
    value = node.attr(ref.attr)
    if value is None:
        key = (node.node_type, ref.attr)
        if key not in _warned_attrs:
            _warned_attrs.add(key)
            log.warning("attribute %r is not present on %s nodes", ref.attr, node.node_type)
        return _ABSENT_ATTR
    return value


def _operand(op, env, ast1, ast2):
    if isinstance(op, Literal):
        return op.value
    return _resolve(op, env, ast1, ast2)


def _comparable(x):
    if isinstance(x, Node) and x.is_literal():
        return x.attr("value")
    return x


def _eval_comparison(cmp: Comparison, env, ast1, ast2) -> bool | None:
    left = _operand(cmp.left, env, ast1, ast2)
    right = _operand(cmp.right, env, ast1, ast2)
    if left is _ABSENT_ATTR or right is _ABSENT_ATTR:
        return False
    if left is _MISSING or right is _MISSING:
        return None
    left, right = _comparable(left), _comparable(right)
    if isinstance(left, Node) or isinstance(right, Node):
        if isinstance(left, Node) and isinstance(right, Node) and cmp.op in ("=", "!="):
            return (left == right) == (cmp.op == "=")
        return None
    if isinstance(left, (int, float)) != isinstance(right, (int, float)):
        return None
    if cmp.op == "=":
        return left == right
    if cmp.op == "!=":
        return left != right
    if cmp.op == "<":
        return left < right
    if cmp.op == "<=":
        return left <= right
    if cmp.op == ">":
        return left > right
    return left >= right


def evaluate_predicate(pred: Predicate, env: dict[str, LiftedRow],
                       ast1: Node, ast2: Node) -> bool | None:
    """Kleene three-valued evaluation; ``None`` means unknown."""
    if isinstance(pred, Comparison):
        return _eval_comparison(pred, env, ast1, ast2)
    if isinstance(pred, NullTest):
        value = _resolve(pred.operand, env, ast1, ast2)
        absent = value is _MISSING or value is _ABSENT_ATTR
        return absent != pred.negated
    if isinstance(pred, NotOp):
        inner = evaluate_predicate(pred.item, env, ast1, ast2)
        return None if inner is None else not inner
    results = [evaluate_predicate(item, env, ast1, ast2) for item in pred.items]
    if pred.op == "and":
        if any(r is False for r in results):
            return False
        return None if any(r is None for r in results) else True
    if any(r is True for r in results):
        return True
    return None if any(r is None for r in results) else False


def eval_statement(stmt: Statement, table: DiffTable,
                   ast1: Node, ast2: Node) -> MatchTable | None:
    """Evaluate one statement against one diff table; ``None`` when it does
    not explain the whole diff.

    An empty table is vacuously explained: identical queries relate under
    every statement, which keeps transitive match relations genuinely
    transitive across repeated queries in a log."""
    if not table.records:
        return MatchTable(stmt.name, table.pid1, table.pid2, ())
    all_dids = {r.did for r in table.records}
    rows_per_binding: list[list[LiftedRow]] = []
    reachable: set[int] = set()
    for binding in stmt.bindings:
        rows = []
        for record in table.records:
            depth = match_record(binding.expr, record, ast1, ast2)
            if depth is not None:
                rows.append(lift(record, depth, ast1, ast2))
                reachable.add(record.did)
        if not rows:
            return None
        rows_per_binding.append(rows)
    if reachable != all_dids:
        return None
    surviving: list[dict[str, LiftedRow]] = []
    for combo in itertools.product(*rows_per_binding):
        env = {b.var: row for b, row in zip(stmt.bindings, combo)}
        if stmt.predicate is None or evaluate_predicate(stmt.predicate, env, ast1, ast2) is True:
            surviving.append(env)
    if not surviving:
        return None
    covered = {row.record.did for env in surviving for row in env.values()}
    if covered != all_dids:
        return None
    claimed: dict[int, MatchRecord] = {}
    for binding in stmt.bindings:  # earlier bindings claim a record first
        for env in surviving:
            row = env[binding.var]
            if row.record.did not in claimed:
                claimed[row.record.did] = MatchRecord(stmt.name, row.record.did, binding.var, row)
    records = tuple(claimed[did] for did in sorted(claimed))
    return MatchTable(stmt.name, table.pid1, table.pid2, records)


def is_transitive(stmt: Statement) -> bool:
    """Whether a match carries across chained pairs, judged from the
    predicate's shape: only equality tests, presence tests and AND preserve
    matching under composition of endpoints."""

    def ok(pred: Predicate) -> bool:
        if isinstance(pred, Comparison):
            return pred.op in ("=", "!=")
        if isinstance(pred, NullTest):
            return True
        if isinstance(pred, BoolOp):
            return pred.op == "and" and all(ok(item) for item in pred.items)
        return False

    return stmt.predicate is None or ok(stmt.predicate)


def _conjuncts(pred: Predicate) -> list[Predicate] | None:
    """Flatten a pure-AND predicate into its comparisons; ``None`` when the
    predicate mixes in OR/NOT and cannot be treated as a conjunct set."""
    if isinstance(pred, (Comparison, NullTest)):
        return [pred]
    if isinstance(pred, BoolOp) and pred.op == "and":
        out: list[Predicate] = []
        for item in pred.items:
            sub = _conjuncts(item)
            if sub is None:
                return None
            out.extend(sub)
        return out
    return None


def is_symmetric(stmt: Statement) -> bool:
    """Whether the predicate is invariant under swapping the two sides of
    every diff record (τ1 ↔ τ2), judged syntactically on the conjunct set.

    Symmetric statements match a pair in both directions or neither, so one
    probe per pair settles membership questions."""
    if stmt.predicate is None:
        return True
    conjuncts = _conjuncts(stmt.predicate)
    if conjuncts is None:
        return False

    def swap_ref(ref):
        if isinstance(ref, NavRef) and ref.side in ("t1", "t2"):
            side = "t2" if ref.side == "t1" else "t1"
            return NavRef(ref.var, side, ref.steps, ref.attr)
        return ref

    def swap(item: Predicate) -> Predicate:
        if isinstance(item, Comparison):
            return Comparison(swap_ref(item.left), item.op, swap_ref(item.right))
        return NullTest(swap_ref(item.operand), item.negated)

    def normalize(item: Predicate) -> str:
        if isinstance(item, Comparison) and item.op in ("=", "!="):
            first, second = sorted((repr(item.left), repr(item.right)))
            return f"{first} {item.op} {second}"
        return repr(item)

    original = Counter(normalize(item) for item in conjuncts)
    swapped = Counter(normalize(swap(item)) for item in conjuncts)
    return original == swapped


def depends_on_literals(stmt: Statement) -> bool:
    """Whether the predicate can read literal leaf values — directly through
    a ``.value`` attribute or by comparing whole subtrees — so that its
    verdict on two queries of identical shape may vary with their literals."""

    def sensitive(pred: Predicate) -> bool:
        if isinstance(pred, Comparison):
            return any(
                isinstance(op, NavRef) and (op.attr == "value" or op.attr is None)
                for op in (pred.left, pred.right)
            )
        if isinstance(pred, NullTest):
            return False  # presence is a shape question
        if isinstance(pred, BoolOp):
            return any(sensitive(item) for item in pred.items)
        return sensitive(pred.item)

    return stmt.predicate is not None and sensitive(stmt.predicate)
