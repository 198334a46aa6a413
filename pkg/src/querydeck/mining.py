"""Interaction mining: from a query log to the interaction multigraph.

The naive pipeline aligns every selected query pair, evaluates every filter
statement over the diff table, and emits one edge per claimed record.  Two
independent avoidance strategies keep large logs tractable without changing
the derivable edge set:

* ``clique``: statements whose predicates are transitive and symmetric are
  probed against one representative per clique instead of per pair; the graph
  stores the cliques and materializes their edges only on demand.  (An
  asymmetric statement can match a pair in only one direction, which clique
  membership cannot represent, so those stay on the pairwise path.)  Clique
  probing visits pairs outside the selected strategy, so it pays off on
  all-pairs mining or combined with ``template``, which answers most probes
  from caches.
* ``template``: queries that share a literal template form a templated
  clique.  Same-template pairs differ only in literal values, so their diff
  tables are synthesized from the value vectors without tree alignment, and
  cross-template alignments are cached per (template pair, value-equality
  pattern) skeleton.

All reverse-direction edges come from the forward alignment with the two
sides swapped, never from a second alignment.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Iterator

from .diff import DiffRecord, DiffTable, align, swap_table
from .errors import ConfigError, MalformedTree, NonTransitiveStatement, QueryDeckError
from .pilang import (
    MatchTable,
    Statement,
    depends_on_literals,
    eval_statement,
    is_symmetric,
    is_transitive,
    match_pathexpr,
    parse_statement,
    parse_statements,
)
from .sqlast import (
    Node,
    Param,
    Path,
    format_path,
    from_json,
    parse_canonical,
    parse_path,
    subtree_at,
    to_json,
    unparse,
    unparse_fragment,
)

__all__ = [
    "QueryEntry",
    "load_log",
    "builtin_statements",
    "PairStrategy",
    "select_pairs",
    "parameterize",
    "parameterize_literals",
    "bind",
    "TemplatedClique",
    "extract_templates",
    "clique_detect",
    "InteractionEdge",
    "InteractionGraph",
    "build_graph",
    "graph_to_json",
    "graph_from_json",
]

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# log ingestion


@dataclass(slots=True)
class QueryEntry:
    """One log line: a query with its provenance metadata.

    ``ast`` is ``None`` when the query failed to parse; ``error`` then holds
    the reason and the entry is excluded from mining but still counts toward
    coverage accounting.
    """

    pid: str
    source: str
    ast: Node | None
    tstamp: str | None = None
    user: str | None = None
    extra: dict = field(default_factory=dict)
    error: str | None = None


def load_log(lines: Iterable[str] | str) -> list[QueryEntry]:
    """Read a JSON-Lines log (path or iterable of lines) into entries.

    Each line is an object with required ``pid`` and ``query`` fields and
    optional ``tstamp``/``user``; unknown fields are preserved in ``extra``.
    Malformed lines and unparseable queries become error entries.
    """
    if isinstance(lines, str):
        with open(lines, encoding="utf-8") as handle:
            raw = handle.readlines()
    else:
        raw = list(lines)
    entries: list[QueryEntry] = []
    seen: set[str] = set()
    for lineno, line in enumerate(raw, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("not an object")
        except ValueError as exc:
            log.warning("log line %d is not a JSON object: %s", lineno, exc)
            entries.append(QueryEntry(f"line-{lineno}", line.strip(), None,
                                      error=f"bad JSON: {exc}"))
            continue
        pid, query = obj.get("pid"), obj.get("query")
        if not isinstance(pid, str) or not isinstance(query, str):
            log.warning("log line %d lacks pid/query", lineno)
            entries.append(QueryEntry(str(pid or f"line-{lineno}"), str(query or ""),
                                      None, error="missing pid or query field"))
            continue
        if pid in seen:
            raise ConfigError(f"duplicate pid {pid!r} in log (line {lineno})")
        seen.add(pid)
        extra = {k: v for k, v in obj.items()
                 if k not in ("pid", "query", "tstamp", "user")}
        try:
            ast = parse_canonical(query)
            error = None
        except QueryDeckError as exc:
            log.warning("query %s does not parse: %s", pid, exc)
            ast, error = None, str(exc)
        entries.append(QueryEntry(pid, query, ast, obj.get("tstamp"),
                                  obj.get("user"), extra, error))
    return entries


def builtin_statements() -> list[Statement]:
    """The statement library shipped with the package (OLAP interactions)."""
    text = resources.files(__package__).joinpath("statements/olap.pil").read_text("utf-8")
    return parse_statements(text)


# --------------------------------------------------------------------------
# pair selection


@dataclass(frozen=True)
class PairStrategy:
    """How query pairs are drawn from the log.

    ``all`` considers every unordered pair, ``seq`` consecutive entries only,
    ``filtered`` every unordered pair among entries passing ``predicate``.
    Both edge orientations are always derived at evaluation time.
    """

    mode: str = "all"
    predicate: Callable[[QueryEntry], bool] | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("all", "seq", "filtered"):
            raise ConfigError(f"unknown pair strategy {self.mode!r}")
        if self.mode == "filtered" and self.predicate is None:
            raise ConfigError("filtered pair strategy needs a predicate")


def select_pairs(
    entries: list[QueryEntry], strategy: PairStrategy = PairStrategy()
) -> Iterator[tuple[QueryEntry, QueryEntry]]:
    """Yield the pairs the strategy selects, parseable entries only."""
    pool = [e for e in entries if e.ast is not None]
    if strategy.mode == "filtered":
        pool = [e for e in pool if strategy.predicate(e)]
    if strategy.mode == "seq":
        yield from zip(pool, pool[1:])
    else:
        yield from itertools.combinations(pool, 2)


# --------------------------------------------------------------------------
# templating


def _walk_parameterize(tree: Node, values: list, paths: list[Path],
                       literals_only: bool, path: Path) -> Node:
    attrs = []
    for key, value in tree.attrs:
        hole = value is not None and (not literals_only or
                                      (tree.is_literal() and key == "value"))
        if hole:
            attrs.append((key, Param(len(values))))
            values.append(value)
            paths.append(path)
        else:
            attrs.append((key, value))
    children = tuple(
        _walk_parameterize(child, values, paths, literals_only, path + (i,))
        for i, child in enumerate(tree.children)
    )
    return Node(tree.node_type, tuple(attrs), children)


def parameterize(tree: Node) -> tuple[Node, tuple]:
    """Replace every primitive attribute value, in preorder, with a numbered
    parameter; returns the template and the extracted value vector."""
    values: list = []
    template = _walk_parameterize(tree, values, [], False, ())
    return template, tuple(values)


def parameterize_literals(tree: Node) -> tuple[Node, tuple, tuple[Path, ...]]:
    """Like :func:`parameterize` but only literal values become parameters;
    also returns each parameter's node path."""
    values: list = []
    paths: list[Path] = []
    template = _walk_parameterize(tree, values, paths, True, ())
    return template, tuple(values), tuple(paths)


def bind(template: Node, values: tuple) -> Node:
    """Instantiate a template: parameter ``$k`` takes ``values[k]``."""
    used: list[int] = []

    def fill(tree: Node) -> Node:
        attrs = []
        for key, value in tree.attrs:
            if isinstance(value, Param):
                if value.index >= len(values):
                    raise MalformedTree(
                        f"template needs parameter ${value.index}, got {len(values)} values"
                    )
                used.append(value.index)
                attrs.append((key, values[value.index]))
            else:
                attrs.append((key, value))
        return Node(tree.node_type, tuple(attrs), tuple(fill(c) for c in tree.children))

    result = fill(template)
    if len(used) != len(values):
        raise MalformedTree(f"template has {len(used)} parameters, got {len(values)} values")
    return result


@dataclass(frozen=True, slots=True)
class TemplatedClique:
    """All queries sharing one literal template.

    ``members`` keeps (pid, literal vector) in log order; binding the template
    with a member's vector reproduces that member's AST exactly.
    """

    template_hash: str
    template: Node
    members: tuple[tuple[str, tuple], ...]
    var_paths: tuple[Path, ...]


def _template_hash(template: Node) -> str:
    payload = json.dumps(to_json(template), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def extract_templates(entries: list[QueryEntry]) -> list[TemplatedClique]:
    """Partition parseable queries by literal template, in first-seen order."""
    groups: dict[Node, tuple[tuple[Path, ...], list[tuple[str, tuple]]]] = {}
    for entry in entries:
        if entry.ast is None:
            continue
        template, values, paths = parameterize_literals(entry.ast)
        if template not in groups:
            groups[template] = (paths, [])
        groups[template][1].append((entry.pid, values))
    return [
        TemplatedClique(_template_hash(template), template, tuple(members), paths)
        for template, (paths, members) in groups.items()
    ]


# --------------------------------------------------------------------------
# edges


@dataclass(frozen=True, slots=True)
class InteractionEdge:
    """One expressible transition between two logged queries.

    The label is ``(path, template)``: ``path`` anchors in the source tree
    (for inserts it is the insertion point) and ``template`` is the target
    subtree with its primitive values parameterized; ``value`` holds one
    scalar per parameter.  ``mode`` tells how the subtree lands: ``replace``,
    ``insert``, ``delete`` (template ``None``), ``collection`` (the whole
    list at ``path`` is rewritten; ``value`` holds the target elements as SQL
    fragments), or ``identity`` (equal queries, nothing to apply).
    """

    src_pid: str
    dst_pid: str
    statement: str
    path: Path
    template: Node | None
    value: tuple = ()
    mode: str = "replace"

    @property
    def label(self) -> tuple[Path, Node | None]:
        return (self.path, self.template)

    def to_json(self) -> dict:
        return {
            "src": self.src_pid,
            "dst": self.dst_pid,
            "statement": self.statement,
            "path": format_path(self.path),
            "template": None if self.template is None else to_json(self.template),
            "value": list(self.value),
            "mode": self.mode,
        }


def _closest_list_ancestor(path: Path, ast: Node) -> Path | None:
    """Deepest proper prefix of ``path`` addressing a list node."""
    for cut in range(len(path) - 1, -1, -1):
        prefix = path[:cut]
        if subtree_at(ast, prefix).is_list():
            return prefix
    return None


def detect_collection_edge(table: MatchTable, ast1: Node, ast2: Node) -> InteractionEdge | None:
    """Collapse a multi-record match into one list-rewrite edge.

    When every matched subtree hangs under the same list node and the list's
    membership actually changes (some element appears or disappears), the
    whole table describes one reshaping of that list; the edge's value is the
    target element sequence.  Same-arity in-place replaces stay element-wise
    — each member is an independent knob — so ``None`` is returned unless at
    least one record is one-sided.
    """
    if len(table) < 2:
        return None
    if all(r.tau1 is not None and r.tau2 is not None for r in table):
        return None
    anchors = {_closest_list_ancestor(record.path, ast1) for record in table}
    if len(anchors) != 1:
        return None
    anchor = anchors.pop()
    if anchor is None:
        return None
    target_list = subtree_at(ast2, anchor)
    return InteractionEdge(
        table.pid1,
        table.pid2,
        table.statement,
        anchor,
        None,
        tuple(unparse_fragment(child) for child in target_list.children),
        "collection",
    )


def edges_from_match(table: MatchTable, ast1: Node, ast2: Node) -> list[InteractionEdge]:
    """One edge per claimed record, or a single collection edge when the
    whole table reshapes one list."""
    collection = detect_collection_edge(table, ast1, ast2)
    if collection is not None:
        return [collection]
    edges = []
    for record in table:
        if record.tau2 is None:
            template, values, mode = None, (), "delete"
        else:
            template, values = parameterize(record.tau2)
            mode = "insert" if record.tau1 is None else "replace"
        edges.append(
            InteractionEdge(table.pid1, table.pid2, table.statement,
                            record.path, template, values, mode)
        )
    return edges


# --------------------------------------------------------------------------
# transitive-statement cliques


def clique_detect(
    statement: Statement,
    entries: list[QueryEntry],
    matcher: Callable[[QueryEntry, QueryEntry], bool] | None = None,
) -> list[tuple[str, ...]]:
    """Group queries into cliques of mutual reachability under a transitive
    statement by probing each query against one representative per clique
    (the first-inserted member); a query joins the first clique whose
    representative matches, else founds its own.

    The matcher is called at most ``len(entries) * number_of_cliques`` times;
    identical queries join by text equality without a probe, which agrees
    with the matcher because an empty diff matches vacuously.
    """
    if not is_transitive(statement):
        raise NonTransitiveStatement(
            f"statement {statement.name!r} has a non-transitive predicate"
        )
    if matcher is None:
        def matcher(a: QueryEntry, b: QueryEntry) -> bool:
            table = align(a.ast, b.ast, a.pid, b.pid)
            return eval_statement(statement, table, a.ast, b.ast) is not None

    canon: dict[str, str] = {}

    def canonical(entry: QueryEntry) -> str:
        text = canon.get(entry.pid)
        if text is None:
            text = canon[entry.pid] = unparse(entry.ast)
        return text

    cliques: list[list[QueryEntry]] = []
    for entry in entries:
        if entry.ast is None:
            continue
        text = canonical(entry)
        for members in cliques:
            representative = members[0]
            if canonical(representative) == text or matcher(representative, entry):
                members.append(entry)
                break
        else:
            cliques.append([entry])
    return [tuple(e.pid for e in members) for members in cliques]


# --------------------------------------------------------------------------
# the graph


@dataclass
class InteractionGraph:
    """Multigraph over the log: parseable queries as nodes, one edge per
    claimed diff record (plus identity edges between equal queries).

    Edges for transitive statements handled by the clique optimization are
    not materialized; ``derivable_edges`` produces the full set on demand.
    ``stats`` is frozen at build time: counters cover the build only.
    """

    entries: list[QueryEntry]
    nodes: list[str]
    edges: list[InteractionEdge]
    cliques: list[tuple[str, tuple[str, ...]]]
    stats: dict
    _asts: dict[str, Node] = field(default_factory=dict, repr=False)
    _statements: list[Statement] = field(default_factory=list, repr=False)
    _strategy: PairStrategy = field(default=PairStrategy(), repr=False)
    _pair_table: Callable | None = field(default=None, repr=False)
    _by_pid: dict[str, QueryEntry] | None = field(default=None, repr=False)
    _edge_index: dict[tuple[str, str], list[InteractionEdge]] | None = field(
        default=None, repr=False)
    _derived: dict[tuple[str, str], tuple[InteractionEdge, ...]] = field(
        default_factory=dict, repr=False)
    _adjacency: dict[str, set[str]] | None = field(default=None, repr=False)

    def entry(self, pid: str) -> QueryEntry:
        """The log entry behind a pid (parseable or not)."""
        if self._by_pid is None:
            self._by_pid = {e.pid: e for e in self.entries}
        try:
            return self._by_pid[pid]
        except KeyError:
            raise ConfigError(f"unknown query pid {pid!r}") from None

    def ast(self, pid: str) -> Node:
        """The parsed tree behind a node pid."""
        tree = self._asts.get(pid)
        if tree is None:
            raise ConfigError(f"query {pid!r} is not a graph node")
        return tree

    def neighbors(self, pid: str) -> frozenset[str]:
        """Pids adjacent to ``pid``: partners of materialized edges in either
        direction plus co-members of any stored clique."""
        if self._adjacency is None:
            adjacency: dict[str, set[str]] = {p: set() for p in self.nodes}
            for edge in self.edges:
                adjacency.setdefault(edge.src_pid, set()).add(edge.dst_pid)
                adjacency.setdefault(edge.dst_pid, set()).add(edge.src_pid)
            for _, members in self.cliques:
                for member in members:
                    adjacency.setdefault(member, set()).update(members)
            for node, partners in adjacency.items():
                partners.discard(node)
            self._adjacency = adjacency
        return frozenset(self._adjacency.get(pid, ()))

    def transition_edges(
        self, src: str, dst: str, cache: bool = True
    ) -> list[InteractionEdge]:
        """Every edge from ``src`` to ``dst``: the materialized ones plus
        edges derived on demand (and cached) from cliques holding both pids.

        ``cache=False`` skips remembering the derived edges — for one-shot
        sweeps over many pairs the cache would only hold memory hostage.
        """
        if self._edge_index is None:
            index: dict[tuple[str, str], list[InteractionEdge]] = {}
            for edge in self.edges:
                index.setdefault((edge.src_pid, edge.dst_pid), []).append(edge)
            self._edge_index = index
        out = list(self._edge_index.get((src, dst), ()))
        derived = self._derived.get((src, dst))
        if derived is None:
            derived = tuple(self._derive(src, dst))
            if cache:
                self._derived[(src, dst)] = derived
        for edge in derived:
            if edge.mode == "identity" and any(e.mode == "identity" for e in out):
                continue
            out.append(edge)
        return out

    def _derive(self, src: str, dst: str) -> list[InteractionEdge]:
        if src == dst:
            return []
        claiming = dict.fromkeys(
            name for name, members in self.cliques
            if src in members and dst in members
        )
        if not claiming:
            return []
        a, b = self.entry(src), self.entry(dst)
        if a.ast == b.ast:
            return [InteractionEdge(src, dst, "identity", (), None, (), "identity")]
        pair_table = self._pair_table or (
            lambda x, y: align(x.ast, y.ast, x.pid, y.pid))
        table = pair_table(a, b)
        by_name = {s.name: s for s in self._statements}
        out: list[InteractionEdge] = []
        for name in claiming:
            match = eval_statement(by_name[name], table, a.ast, b.ast)
            if match is not None:
                out.extend(edges_from_match(match, a.ast, b.ast))
        return out

    def derivable_edges(self) -> list[InteractionEdge]:
        """Materialized edges plus every edge the stored cliques stand for,
        restricted to the pairs the build strategy selected."""
        out = list(self.edges)
        if not self.cliques:
            return out
        by_name = {s.name: s for s in self._statements}
        member_sets = [
            (by_name[name], frozenset(members)) for name, members in self.cliques
        ]
        pair_table = self._pair_table or (
            lambda a, b: align(a.ast, b.ast, a.pid, b.pid)
        )
        for a, b in select_pairs(self.entries, self._strategy):
            if a.ast == b.ast:
                continue  # identity edges are always materialized
            claiming = [
                statement for statement, members in member_sets
                if a.pid in members and b.pid in members
            ]
            if not claiming:
                continue
            forward = pair_table(a, b)
            for table, ast1, ast2 in (
                (forward, a.ast, b.ast),
                (swap_table(forward), b.ast, a.ast),
            ):
                for statement in claiming:
                    match = eval_statement(statement, table, ast1, ast2)
                    if match is not None:
                        out.extend(edges_from_match(match, ast1, ast2))
        return out


class _Templater:
    """Shared machinery for the template optimization.

    Knows, for every parsed query, its templated clique; builds same-template
    diff tables from literal vectors (when the per-element edit density keeps
    the alignment outcome predictable) and caches cross-template alignment
    skeletons keyed by the value-equality pattern.
    """

    def __init__(self, entries: list[QueryEntry]):
        self.cliques = extract_templates(entries)
        self.by_pid: dict[str, tuple[TemplatedClique, tuple]] = {}
        for clique in self.cliques:
            for pid, values in clique.members:
                self.by_pid[pid] = (clique, values)
        self._element_groups: dict[str, dict[int, tuple[Path, ...]]] = {}
        self._relevant: dict[tuple[str, str], bool] = {}
        self._skeletons: dict[tuple, list[tuple[Path, Path, bool, bool]]] = {}

    def _elements_over(self, clique: TemplatedClique) -> dict[int, tuple[Path, ...]]:
        """Parameter index -> the list-element prefixes above its node."""
        cached = self._element_groups.get(clique.template_hash)
        if cached is not None:
            return cached
        out: dict[int, tuple[Path, ...]] = {}
        for index, path in enumerate(clique.var_paths):
            prefixes = []
            for cut in range(1, len(path) + 1):
                node = subtree_at(clique.template, path[:cut - 1])
                if node.is_list():
                    prefixes.append(path[:cut])
            out[index] = tuple(prefixes)
        self._element_groups[clique.template_hash] = out
        return out

    def relevant(self, clique: TemplatedClique, statement: Statement) -> bool:
        """Whether any binding of the statement can land on any literal's
        chain.

        Same-template pairs only ever produce records at the template's
        literal paths, so when no literal chain satisfies any binding the
        statement cannot match within the clique (except the vacuous match of
        identical queries); those pairs are skipped whole.
        """
        key = (clique.template_hash, statement.name)
        cached = self._relevant.get(key)
        if cached is not None:
            return cached
        result = any(
            match_pathexpr(binding.expr, path, clique.template) is not None
            for path in clique.var_paths
            for binding in statement.bindings
        )
        self._relevant[key] = result
        return result

    def differ_pattern(self, a: QueryEntry, b: QueryEntry) -> tuple[int, ...]:
        """Indices of the literal positions where the two members differ."""
        values_a = self.by_pid[a.pid][1]
        values_b = self.by_pid[b.pid][1]
        return tuple(i for i, (x, y) in enumerate(zip(values_a, values_b)) if x != y)

    def delta_table(self, a: QueryEntry, b: QueryEntry) -> DiffTable | None:
        """Same-template diff without alignment, or ``None`` when the edit
        density could make real alignment prefer element-level records."""
        clique, values_a = self.by_pid[a.pid]
        values_b = self.by_pid[b.pid][1]
        differing = [i for i, (x, y) in enumerate(zip(values_a, values_b)) if x != y]
        elements = self._elements_over(clique)
        density = Counter(prefix for i in differing for prefix in elements[i])
        if any(count > 2 for count in density.values()):
            return None
        records = []
        for did, index in enumerate(differing):
            path = clique.var_paths[index]
            records.append(DiffRecord(
                did, a.pid, b.pid, path,
                subtree_at(a.ast, path), subtree_at(b.ast, path), path,
            ))
        return DiffTable(a.pid, b.pid, tuple(records))

    def pattern_key(self, a: QueryEntry, b: QueryEntry) -> tuple:
        """Cache key for a cross-template pair: the alignment outcome depends
        only on the two templates and on which literal values coincide."""
        clique_a, values_a = self.by_pid[a.pid]
        clique_b, values_b = self.by_pid[b.pid]
        pattern = tuple(
            tuple(x == y for y in values_b) for x in values_a
        )
        return (clique_a.template_hash, clique_b.template_hash, pattern)

    def from_skeleton(self, key: tuple, a: QueryEntry, b: QueryEntry) -> DiffTable | None:
        skeleton = self._skeletons.get(key)
        if skeleton is None:
            return None
        records = []
        for did, (path, path2, has_tau1, has_tau2) in enumerate(skeleton):
            tau1 = subtree_at(a.ast, path) if has_tau1 else None
            tau2 = subtree_at(b.ast, path2) if has_tau2 else None
            records.append(DiffRecord(did, a.pid, b.pid, path, tau1, tau2, path2))
        return DiffTable(a.pid, b.pid, tuple(records))

    def store_skeleton(self, key: tuple, table: DiffTable) -> None:
        self._skeletons[key] = [
            (r.path, r.path2, r.tau1 is not None, r.tau2 is not None) for r in table
        ]


def build_graph(
    entries: list[QueryEntry],
    statements: list[Statement],
    strategy: PairStrategy = PairStrategy(),
    *,
    clique: bool = False,
    template: bool = False,
) -> InteractionGraph:
    """Run the mining pipeline over the log.

    Whatever the optimization flags, the derivable edge set equals the naive
    pipeline's; the flags only change how much work the build does, which the
    returned ``stats`` report (``align_calls``, ``eval_calls``, ``pairs``).
    """
    parsed = [e for e in entries if e.ast is not None]
    stats = {
        "entries": len(entries),
        "parsed": len(parsed),
        "pairs": 0,
        "align_calls": 0,
        "eval_calls": 0,
    }
    templater = _Templater(parsed) if template else None

    def pair_table(a: QueryEntry, b: QueryEntry) -> DiffTable:
        if templater is not None:
            clique_a = templater.by_pid[a.pid][0]
            clique_b = templater.by_pid[b.pid][0]
            if clique_a is clique_b:
                table = templater.delta_table(a, b)
                if table is not None:
                    return table
            else:
                key = templater.pattern_key(a, b)
                table = templater.from_skeleton(key, a, b)
                if table is not None:
                    return table
                stats["align_calls"] += 1
                table = align(a.ast, b.ast, a.pid, b.pid)
                templater.store_skeleton(key, table)
                return table
        stats["align_calls"] += 1
        return align(a.ast, b.ast, a.pid, b.pid)

    def evaluate(statement, table, ast1, ast2):
        stats["eval_calls"] += 1
        return eval_statement(statement, table, ast1, ast2)

    verdicts: dict[tuple, bool] = {}

    def make_matcher(statement: Statement) -> Callable[[QueryEntry, QueryEntry], bool]:
        """Pair matcher for clique probes.  With templates on, a probe whose
        verdict is determined by the pair's shape alone — the statement never
        reads literal values — is answered once per (template, value pattern)
        and then served from cache."""
        cacheable = not depends_on_literals(statement)

        def matcher(a: QueryEntry, b: QueryEntry) -> bool:
            key = None
            if templater is not None:
                clique_a = templater.by_pid[a.pid][0]
                clique_b = templater.by_pid[b.pid][0]
                if clique_a is clique_b:
                    if not templater.relevant(clique_a, statement):
                        return False
                    if cacheable:
                        key = (statement.name, clique_a.template_hash,
                               templater.differ_pattern(a, b))
                elif cacheable:
                    key = (statement.name, *templater.pattern_key(a, b))
                if key is not None:
                    cached = verdicts.get(key)
                    if cached is not None:
                        return cached
            verdict = evaluate(statement, pair_table(a, b), a.ast, b.ast) is not None
            if key is not None:
                verdicts[key] = verdict
            return verdict

        return matcher

    routed = [s for s in statements if is_transitive(s) and is_symmetric(s)] if clique else []
    routed_names = {s.name for s in routed}
    direct = [s for s in statements if s.name not in routed_names]

    edges: list[InteractionEdge] = []
    for a, b in select_pairs(entries, strategy):
        stats["pairs"] += 1
        if a.ast == b.ast:
            edges.append(InteractionEdge(a.pid, b.pid, "identity", (), None, (), "identity"))
            edges.append(InteractionEdge(b.pid, a.pid, "identity", (), None, (), "identity"))
            continue
        applicable = direct
        if templater is not None:
            clique_a = templater.by_pid[a.pid][0]
            if clique_a is templater.by_pid[b.pid][0]:
                applicable = [s for s in direct if templater.relevant(clique_a, s)]
        if not applicable:
            continue
        forward = pair_table(a, b)
        for table, ast1, ast2 in (
            (forward, a.ast, b.ast),
            (swap_table(forward), b.ast, a.ast),
        ):
            for statement in applicable:
                match = evaluate(statement, table, ast1, ast2)
                if match is not None:
                    edges.extend(edges_from_match(match, ast1, ast2))

    cliques: list[tuple[str, tuple[str, ...]]] = []
    for statement in routed:
        for members in clique_detect(statement, parsed, make_matcher(statement)):
            if len(members) > 1:
                cliques.append((statement.name, members))
    if clique:
        stats["cliques"] = len(cliques)
    if template and templater is not None:
        stats["template_cliques"] = len(templater.cliques)

    graph = InteractionGraph(
        entries=list(entries),
        nodes=[e.pid for e in parsed],
        edges=edges,
        cliques=cliques,
        stats=dict(stats),
        _asts={e.pid: e.ast for e in parsed},
        _statements=list(statements),
        _strategy=strategy,
        _pair_table=pair_table,
    )
    return graph


def graph_to_json(graph: InteractionGraph) -> dict:
    """Self-contained serializable view.

    Besides nodes, materialized edges, cliques and build stats, the JSON
    carries the raw query text and the statement sources, so a graph rebuilt
    from it can still derive clique edges and verify transitions on demand.
    """
    return {
        "queries": {e.pid: e.source for e in graph.entries},
        "statements": {s.name: s.source for s in graph._statements},
        "pairs": graph._strategy.mode,
        "nodes": list(graph.nodes),
        "edges": [edge.to_json() for edge in graph.edges],
        "cliques": [
            {"statement": name, "members": list(members)}
            for name, members in graph.cliques
        ],
        "stats": dict(graph.stats),
    }


def graph_from_json(data: dict) -> InteractionGraph:
    """Rebuild a graph from :func:`graph_to_json` output.

    Queries are re-parsed from their stored text and statements from their
    sources, so clique-edge derivation works exactly as on the original.  A
    ``filtered`` pair strategy cannot ride through JSON (its predicate is
    code); such graphs must be rebuilt in process.
    """
    try:
        queries = data["queries"]
        sources = data["statements"]
        edge_rows = data["edges"]
        clique_rows = data["cliques"]
    except (TypeError, KeyError):
        raise ConfigError(
            "graph JSON needs queries, statements, edges and cliques keys"
        ) from None
    mode = data.get("pairs", "all")
    if mode == "filtered":
        raise ConfigError(
            "a graph mined with a filtered pair strategy cannot be rebuilt "
            "from JSON; rebuild it in process"
        )
    entries: list[QueryEntry] = []
    for pid, source in queries.items():
        try:
            tree, error = parse_canonical(source), None
        except QueryDeckError as exc:
            tree, error = None, str(exc)
        entries.append(QueryEntry(pid, source, tree, error=error))
    statements = [parse_statement(source) for source in sources.values()]
    edges = [
        InteractionEdge(
            row["src"], row["dst"], row["statement"], parse_path(row["path"]),
            None if row["template"] is None else from_json(row["template"]),
            tuple(row["value"]), row["mode"],
        )
        for row in edge_rows
    ]
    cliques = [(row["statement"], tuple(row["members"])) for row in clique_rows]
    return InteractionGraph(
        entries=entries,
        nodes=[e.pid for e in entries if e.ast is not None],
        edges=edges,
        cliques=cliques,
        stats=dict(data.get("stats", {})),
        _asts={e.pid: e.ast for e in entries if e.ast is not None},
        _statements=statements,
        _strategy=PairStrategy(mode),
    )
