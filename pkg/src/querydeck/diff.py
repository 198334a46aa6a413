"""Ordered tree alignment between two canonical queries.

``align`` produces the minimal list of subtree substitutions, insertions and
deletions that rewrites one tree into the other; ``replay`` applies such a
table back onto the source tree.

Model
-----
Two nodes may be *matched* only when their labels (type + attributes) are
equal; matched nodes contribute no record and their children are aligned
recursively (positionally under fixed-arity nodes, via sequence alignment
under list nodes).  A pair of differing-label nodes in compatible positions
becomes one substitution record covering both whole subtrees.  Unmatched list
elements become deletion/insertion records.  Under list nodes the sequence
alignment minimizes total record count, so a heavily-edited element may come
out as delete + insert when that is cheaper than per-descendant records.

Paths address the source tree for substitutions and deletions; insertion
paths are the parent's source path plus the child index in the *target*
list.  Replay therefore applies, per parent, substitutions and deletions in
descending index order and then insertions in ascending target order,
processing deeper parents first.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MalformedTree
from .sqlast import LIST_TYPES, Node, Path, format_path, substitute, subtree_at, unparse_fragment

__all__ = ["DiffRecord", "DiffTable", "align", "replay", "swap_table"]


@dataclass(frozen=True, slots=True)
class DiffRecord:
    """One edit: ``tau1`` absent means insertion, ``tau2`` absent means deletion."""

    did: int
    pid1: str
    pid2: str
    path: Path
    tau1: Node | None
    tau2: Node | None
    #: where the edit lands in the *target* tree: full path for substitutions
    #: and insertions, the parent's path for deletions.  Lets consumers walk
    #: the target-side ancestor chain; not part of the serialized record.
    path2: Path | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.tau1 is None and self.tau2 is None:
            raise MalformedTree("a diff record needs at least one side")

    @property
    def kind(self) -> str:
        if self.tau1 is None:
            return "insert"
        if self.tau2 is None:
            return "delete"
        return "substitute"

    def to_dict(self) -> dict:
        return {
            "did": self.did,
            "pid1": self.pid1,
            "pid2": self.pid2,
            "path": format_path(self.path),
            "tau1": None if self.tau1 is None else unparse_fragment(self.tau1),
            "tau2": None if self.tau2 is None else unparse_fragment(self.tau2),
        }


@dataclass(frozen=True, slots=True)
class DiffTable:
    pid1: str
    pid2: str
    records: tuple[DiffRecord, ...]
    #: matched same-label node pairs (source path, target path); identical
    #: subtrees are recorded at their roots only.  Used for structural checks.
    matched: tuple[tuple[Path, Path], ...] = field(default=(), repr=False)

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def to_dicts(self) -> list[dict]:
        return [r.to_dict() for r in self.records]


def align(t1: Node, t2: Node, pid1: str = "p1", pid2: str = "p2") -> DiffTable:
    """Align two trees and return the minimal diff table."""
    memo: dict[tuple[int, int], int] = {}
    out: list[tuple[Path, Node | None, Node | None, Path]] = []
    matched: list[tuple[Path, Path]] = []
    if t1 == t2:
        matched.append(((), ()))
    elif t1.label != t2.label:
        out.append(((), t1, t2, ()))
    else:
        _script(t1, t2, (), (), out, matched, memo)
    # order records by source-tree preorder; insertions sort after a
    # substitution anchored at the same textual path
    out.sort(key=lambda item: (item[0], item[1] is None))
    records = tuple(
        DiffRecord(did, pid1, pid2, path, tau1, tau2, path2)
        for did, (path, tau1, tau2, path2) in enumerate(out)
    )
    return DiffTable(pid1, pid2, records, tuple(matched))


def _cost(a: Node, b: Node, memo: dict[tuple[int, int], int]) -> int:
    """Minimal number of records needed to rewrite ``a`` into ``b``."""
    if a == b:
        return 0
    if a.label != b.label:
        return 1
    key = (id(a), id(b))
    cached = memo.get(key)
    if cached is not None:
        return cached
    if a.node_type in LIST_TYPES:
        result = _list_dp(a.children, b.children, memo)[0][0]
    else:
        result = sum(_cost(ca, cb, memo) for ca, cb in zip(a.children, b.children))
    memo[key] = result
    return result


def _list_dp(
    xs: tuple[Node, ...], ys: tuple[Node, ...], memo: dict[tuple[int, int], int]
) -> list[list[int]]:
    """dp[i][j] = minimal records aligning xs[i:] with ys[j:]."""
    m, n = len(xs), len(ys)
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        dp[i][n] = m - i
    for j in range(n - 1, -1, -1):
        dp[m][j] = n - j
    for i in range(m - 1, -1, -1):
        for j in range(n - 1, -1, -1):
            dp[i][j] = min(
                _cost(xs[i], ys[j], memo) + dp[i + 1][j + 1],
                1 + dp[i + 1][j],  # delete xs[i]
                1 + dp[i][j + 1],  # insert ys[j]
            )
    return dp


def _script(
    a: Node,
    b: Node,
    p1: Path,
    p2: Path,
    out: list[tuple[Path, Node | None, Node | None, Path]],
    matched: list[tuple[Path, Path]],
    memo: dict[tuple[int, int], int],
) -> None:
    """Emit records for a matched same-label pair ``(a, b)``."""
    matched.append((p1, p2))
    if a == b:
        return
    if a.node_type not in LIST_TYPES:
        for k, (ca, cb) in enumerate(zip(a.children, b.children)):
            _emit_pair(ca, cb, p1 + (k,), p2 + (k,), out, matched, memo)
        return
    xs, ys = a.children, b.children
    dp = _list_dp(xs, ys, memo)
    i = j = 0
    m, n = len(xs), len(ys)
    while i < m or j < n:
        if i < m and j < n and dp[i][j] == _cost(xs[i], ys[j], memo) + dp[i + 1][j + 1]:
            _emit_pair(xs[i], ys[j], p1 + (i,), p2 + (j,), out, matched, memo)
            i += 1
            j += 1
        elif i < m and dp[i][j] == 1 + dp[i + 1][j]:
            out.append((p1 + (i,), xs[i], None, p2))
            i += 1
        else:
            out.append((p1 + (j,), None, ys[j], p2 + (j,)))
            j += 1


def _emit_pair(
    a: Node,
    b: Node,
    p1: Path,
    p2: Path,
    out: list[tuple[Path, Node | None, Node | None, Path]],
    matched: list[tuple[Path, Path]],
    memo: dict[tuple[int, int], int],
) -> None:
    if a == b:
        matched.append((p1, p2))
        return
    if a.label != b.label:
        out.append((p1, a, b, p2))  # one substitution covering both subtrees
        return
    _script(a, b, p1, p2, out, matched, memo)


def swap_table(table: DiffTable) -> DiffTable:
    """The same alignment read in the opposite direction.

    Substitutions swap sides, deletions become insertions of the removed
    subtree at its old position, insertions become deletions.  Evaluating
    both orientations of a pair therefore needs only one alignment.
    """
    swapped: list[tuple[Path, Node | None, Node | None, Path]] = []
    for r in table.records:
        if r.tau2 is None:  # deletion -> insertion into the old target tree
            parent = r.path2 if r.path2 is not None else r.path[:-1]
            swapped.append((parent + (r.path[-1],), None, r.tau1, r.path))
        elif r.tau1 is None:  # insertion -> deletion out of the old target tree
            full = r.path2 if r.path2 is not None else r.path
            swapped.append((full, r.tau2, None, r.path[:-1]))
        else:
            full = r.path2 if r.path2 is not None else r.path
            swapped.append((full, r.tau2, r.tau1, r.path))
    swapped.sort(key=lambda item: (item[0], item[1] is None))
    records = tuple(
        DiffRecord(did, table.pid2, table.pid1, path, tau1, tau2, path2)
        for did, (path, tau1, tau2, path2) in enumerate(swapped)
    )
    matched = tuple((p2, p1) for p1, p2 in table.matched)
    return DiffTable(table.pid2, table.pid1, records, matched)


def replay(base: Node, table: DiffTable) -> Node:
    """Apply a diff table onto its source tree, returning the target tree."""
    groups: dict[Path, list[DiffRecord]] = {}
    for record in table.records:
        groups.setdefault(record.path[:-1] if record.path else (), []).append(record)
    current = base
    for parent in sorted(groups, reverse=True):
        anchored = [r for r in groups[parent] if r.tau1 is not None]
        inserts = [r for r in groups[parent] if r.tau1 is None]
        for record in sorted(anchored, key=lambda r: r.path, reverse=True):
            expected = subtree_at(current, record.path)
            if expected != record.tau1:
                raise MalformedTree(
                    f"diff table does not fit the tree at {format_path(record.path)}"
                )
            current = substitute(current, record.path, record.tau2)
        for record in sorted(inserts, key=lambda r: r.path):
            current = substitute(current, record.path, record.tau2, insert=True)
    return current
