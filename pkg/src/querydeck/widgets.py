"""Widget candidates, cost model, and greedy interface synthesis.

This module turns an interaction multigraph into a small set of interfaces.
Each interface owns an initial query plus a set of widgets; a widget is a
typed control bound to one tree location and one parameterized subtree shape,
and its option domain is the union of every concrete value the log exhibited
there.  Synthesis starts from one empty interface per query and greedily
merges the pair with the highest cost reduction, where cost charges each
widget a weighted sum of per-family scores (visual footprint, interaction
effort) and each interface a fixed overhead ``c0``.

Honesty is structural: an interface only counts a query as covered when the
widget set demonstrably reproduces that query's tree by replaying concrete
widget values over the initial tree.  Merges that would break any previously
covered query are rejected outright, so coverage never regresses.
"""

from __future__ import annotations

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .diff import DiffRecord, DiffTable, replay
from .errors import (
    HeterogeneousGroup,
    NoCandidate,
    QueryDeckError,
    WeightMismatch,
)
from .mining import InteractionEdge, InteractionGraph, bind, parameterize
from .sqlast import (
    LIST_TYPES,
    Node,
    Param,
    Path,
    format_path,
    parse_fragment,
    subtree_at,
    to_json,
)

__all__ = [
    "WidgetType",
    "DEFAULT_TYPES",
    "DEFAULT_ALPHAS",
    "Widget",
    "CandidateSet",
    "Candidate",
    "Interface",
    "InterfaceSet",
    "extract_template_function",
    "candidate_widgets",
    "widget_cost",
    "interface_cost",
    "set_cost",
    "closure",
    "greedy_synthesize",
]

log = logging.getLogger(__name__)

DEFAULT_ALPHAS: tuple[float, float] = (1.0, 1.0)
DEFAULT_C0 = 1.0


# --------------------------------------------------------------------------
# widget types and the cost model


@dataclass(frozen=True)
class WidgetType:
    """One renderable control family.

    ``general_domain(arity, rows)`` decides whether a value table fits the
    type; ``arity`` is the tuple width and ``rows`` the distinct option
    tuples.  ``cost_fns`` holds one scoring function per cost family, each
    mapping the option rows to ``[0, 1]``; family order is shared across all
    types so one weight vector prices every widget.  ``collection_capable``
    types rewrite a whole list node at once and are only offered for
    collection candidates — scalar candidates never see them, and vice versa.
    """

    type_id: str
    general_domain: Callable[[int, tuple[tuple, ...]], bool]
    cost_fns: tuple[Callable[[tuple[tuple, ...]], float], ...]
    collection_capable: bool = False

    def __repr__(self) -> str:  # the bare functions are noise in test output
        return f"WidgetType({self.type_id!r})"


def _numeric(value: object) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _const(score: float) -> Callable[[tuple[tuple, ...]], float]:
    return lambda rows: score


def _fraction_of(cap: int) -> Callable[[tuple[tuple, ...]], float]:
    return lambda rows: min(1.0, len(rows) / cap)


def _visual_button(rows: tuple[tuple, ...]) -> float:
    return max(0.0, min(1.0, len(rows) - 1))


def _visual_toggle(rows: tuple[tuple, ...]) -> float:
    return 0.0 if len(rows) == 2 else 1.0


def _ordered_numeric_pair(arity: int, rows: tuple[tuple, ...]) -> bool:
    return arity == 2 and all(
        _numeric(r[0]) and _numeric(r[1]) and r[0] < r[1] for r in rows
    )


DEFAULT_TYPES: tuple[WidgetType, ...] = (
    WidgetType("button", lambda k, rows: k == 0, (_visual_button, _const(0.1))),
    WidgetType("toggle", lambda k, rows: k >= 1, (_visual_toggle, _const(0.1))),
    WidgetType("dropdown", lambda k, rows: k >= 1, (_fraction_of(20), _const(0.4))),
    WidgetType("textbox", lambda k, rows: k == 1, (_const(0.1), _const(1.0))),
    WidgetType(
        "slider",
        lambda k, rows: k == 1 and all(_numeric(r[0]) for r in rows),
        (_const(0.15), _const(0.2)),
    ),
    WidgetType("range_slider", _ordered_numeric_pair, (_const(0.15), _const(0.2))),
    WidgetType(
        "checkbox_list",
        lambda k, rows: k == 1,
        (_fraction_of(12), _const(0.3)),
        collection_capable=True,
    ),
    WidgetType(
        "multi_select",
        lambda k, rows: k == 1,
        (_fraction_of(20), _const(0.4)),
        collection_capable=True,
    ),
)


def _type_cost(
    widget_type: WidgetType, rows: tuple[tuple, ...], alphas: Sequence[float]
) -> float:
    if len(alphas) != len(widget_type.cost_fns):
        raise WeightMismatch(
            f"{len(alphas)} weights for {len(widget_type.cost_fns)} cost families"
        )
    return sum(a * fn(rows) for a, fn in zip(alphas, widget_type.cost_fns))


# --------------------------------------------------------------------------
# templates over groups of subtrees


def _reduce_template(template: Node, keep: tuple[int, ...], values: tuple) -> Node:
    """Re-bind the parameters outside ``keep`` to their shared value and
    renumber the survivors ``$0 .. $len(keep)-1`` in place."""
    renumber = {orig: new for new, orig in enumerate(keep)}

    def walk(node: Node) -> Node:
        attrs = []
        for key, value in node.attrs:
            if isinstance(value, Param):
                if value.index in renumber:
                    attrs.append((key, Param(renumber[value.index])))
                else:
                    attrs.append((key, values[value.index]))
            else:
                attrs.append((key, value))
        return Node(node.node_type, tuple(attrs), tuple(walk(c) for c in node.children))

    return walk(template)


def extract_template_function(subtrees: Sequence[Node]) -> tuple[Node, tuple[tuple, ...]]:
    """Common template plus value table for a group of same-shaped subtrees.

    Every primitive attribute is parameterized first; parameters whose value
    is identical across the whole group are bound back into the template, and
    the remaining holes are renumbered ``$0..``.  The table holds one tuple
    of surviving-parameter values per distinct assignment, in first-seen
    order.  A group that collapses to a single constant subtree yields a
    parameterless template and an empty table.

    Raises :class:`HeterogeneousGroup` when the subtrees do not share one
    parameterized shape.
    """
    if not subtrees:
        raise ValueError("need at least one subtree")
    pairs = [parameterize(tree) for tree in subtrees]
    template = pairs[0][0]
    for other, _ in pairs[1:]:
        if other != template:
            raise HeterogeneousGroup("subtrees do not share one parameterized shape")
    vectors = [vec for _, vec in pairs]
    first = vectors[0]
    keep = tuple(
        i for i in range(len(first)) if any(vec[i] != first[i] for vec in vectors)
    )
    reduced = _reduce_template(template, keep, first)
    if not keep:
        return reduced, ()
    table = tuple(dict.fromkeys(tuple(vec[i] for i in keep) for vec in vectors))
    return reduced, table


def _template_text(template: Node | None) -> str | None:
    """Stable textual form of a template, used as a cheap-to-hash dict key."""
    return None if template is None else repr(to_json(template))


# --------------------------------------------------------------------------
# candidates: fused edge groups, keyed (path, template, mode)


class Candidate:
    """Every parallel transition sharing ``(path, template, mode)``, fused.

    ``rows`` keeps the distinct full value tuples in first-seen order; for
    collection candidates they are 1-tuples of list-element fragments (the
    option pool).  The cost-relevant view — which parameter positions
    actually vary, the template reduced to those positions, and the
    projected option rows — is derived lazily and cached per instance;
    fusing returns a fresh candidate whenever the row set grows.
    """

    __slots__ = ("path", "template", "mode", "rows", "row_set", "key", "_analysis", "_costs")

    def __init__(
        self,
        path: Path,
        template: Node | None,
        mode: str,
        rows: Iterable[tuple],
        _key: tuple | None = None,
    ) -> None:
        self.path = tuple(path)
        self.template = template
        self.mode = mode
        self.rows: tuple[tuple, ...] = tuple(dict.fromkeys(tuple(r) for r in rows))
        self.row_set = frozenset(self.rows)
        self.key = _key if _key is not None else (self.path, _template_text(template), mode)
        self._analysis: tuple | None = None
        self._costs: dict = {}

    @classmethod
    def from_edge(cls, edge: InteractionEdge) -> "Candidate":
        if edge.mode == "collection":
            return cls(edge.path, None, "collection", ((f,) for f in edge.value))
        return cls(edge.path, edge.template, edge.mode, (tuple(edge.value),))

    def fuse(self, other: "Candidate") -> "Candidate":
        """Union of the two option pools; ``self`` when nothing is new."""
        if other.row_set <= self.row_set:
            return self
        return Candidate(
            self.path, self.template, self.mode, self.rows + other.rows, _key=self.key
        )

    def analysis(self) -> tuple[tuple[int, ...], Node | None, tuple[tuple, ...]]:
        """``(varying indices, reduced template, projected option rows)``."""
        if self._analysis is None:
            if self.mode == "collection" or self.template is None:
                # collections keep their 1-tuple option pool; deletions carry
                # a single empty tuple (press to remove)
                self._analysis = ((), None, self.rows)
            else:
                first = self.rows[0]
                keep = tuple(
                    i
                    for i in range(len(first))
                    if any(row[i] != first[i] for row in self.rows)
                )
                reduced = _reduce_template(self.template, keep, first)
                if keep:
                    # distinct full rows stay distinct under this projection
                    # because keep holds every position where any two differ
                    projected = tuple(tuple(row[i] for i in keep) for row in self.rows)
                else:
                    projected = ()
                self._analysis = (keep, reduced, projected)
        return self._analysis

    def arity(self) -> int:
        if self.mode == "collection":
            return 1
        return len(self.analysis()[0])

    def project(self, row: tuple) -> tuple:
        """Reduce a full value tuple to the varying positions."""
        if self.mode == "collection":
            return tuple(row)
        keep = self.analysis()[0]
        return tuple(row[i] for i in keep)

    def eligible(
        self, types: Sequence[WidgetType] = DEFAULT_TYPES
    ) -> tuple[WidgetType, ...]:
        want_collection = self.mode == "collection"
        arity = self.arity()
        _, _, projected = self.analysis()
        return tuple(
            t
            for t in types
            if t.collection_capable == want_collection
            and t.general_domain(arity, projected)
        )

    def cost(
        self,
        types: Sequence[WidgetType] = DEFAULT_TYPES,
        alphas: Sequence[float] = DEFAULT_ALPHAS,
    ) -> float:
        """Cost of the cheapest eligible type; ``inf`` when none fits."""
        cache_key = (tuple(types), tuple(alphas))
        cached = self._costs.get(cache_key)
        if cached is None:
            projected = self.analysis()[2]
            cached = math.inf
            for t in self.eligible(types):
                c = _type_cost(t, projected, alphas)
                if c < cached:
                    cached = c
            self._costs[cache_key] = cached
        return cached

    def resolve(
        self,
        types: Sequence[WidgetType] = DEFAULT_TYPES,
        alphas: Sequence[float] = DEFAULT_ALPHAS,
    ) -> "Widget":
        """Materialize the cheapest eligible type as a concrete widget."""
        eligible = self.eligible(types)
        if not eligible:
            raise NoCandidate(
                f"no widget type fits the candidate at {format_path(self.path)}"
            )
        _, reduced, projected = self.analysis()
        best = min(eligible, key=lambda t: _type_cost(t, projected, alphas))
        return Widget(best, self.path, reduced, projected, self.mode)

    def __repr__(self) -> str:
        return (
            f"Candidate(path={format_path(self.path)!r}, mode={self.mode!r}, "
            f"rows={len(self.rows)})"
        )


@dataclass(frozen=True)
class Widget:
    """A typed control bound to one tree location.

    ``template`` is the subtree shape the control instantiates, with one hole
    per state dimension (``None`` for deletions and collection rewrites);
    ``domain`` holds the offered option tuples — for collection widgets,
    1-tuples of list-element fragments.  The constructor does not police
    ``domain`` against the type's admission rule, so costs can be probed on
    hand-built domains; admission is checked where candidates are formed.
    """

    widget_type: WidgetType
    path: Path
    template: Node | None
    domain: tuple[tuple, ...]
    mode: str = "replace"

    @property
    def type_id(self) -> str:
        return self.widget_type.type_id

    def cost(self, alphas: Sequence[float] = DEFAULT_ALPHAS) -> float:
        return _type_cost(self.widget_type, self.domain, alphas)


@dataclass(frozen=True)
class CandidateSet:
    """Widgets that express the same transition and differ only in type."""

    path: Path
    template: Node | None
    mode: str
    domain: tuple[tuple, ...]
    members: tuple[Widget, ...]

    def cost(self, alphas: Sequence[float] = DEFAULT_ALPHAS) -> float:
        """Cost of the cheapest member; ``inf`` when the set is empty."""
        if not self.members:
            return math.inf
        return min(w.cost(alphas) for w in self.members)

    def cheapest(self, alphas: Sequence[float] = DEFAULT_ALPHAS) -> Widget:
        if not self.members:
            raise NoCandidate(
                f"no widget type fits the transition at {format_path(self.path)}"
            )
        return min(self.members, key=lambda w: w.cost(alphas))


def candidate_widgets(
    edge: InteractionEdge,
    values: Sequence[tuple] | None = None,
    types: Sequence[WidgetType] = DEFAULT_TYPES,
) -> CandidateSet:
    """Widget candidates for one transition edge.

    ``values`` optionally supplies the aggregated option table gathered from
    every parallel edge with the same label; when omitted the edge's own
    value is the whole table.  A type is a candidate iff its arity matches
    the candidate's state width and every option row passes its admission
    rule.  Raises :class:`NoCandidate` when ``types`` is empty — with a
    non-empty palette the result may simply have no members, which prices
    the transition as unrealizable.
    """
    types = tuple(types)
    if not types:
        raise NoCandidate("the widget type palette is empty")
    if edge.mode == "collection":
        rows: Iterable[tuple] = ((f,) for f in edge.value)
        if values is not None:
            rows = list(rows) + [tuple(r) for r in values]
        cand = Candidate(edge.path, None, "collection", rows)
    elif values is not None and edge.template is not None:
        # the caller's option rows line up with the template's parameters,
        # so re-analysis keeps exactly the positions that vary
        cand = Candidate(edge.path, edge.template, edge.mode, values)
    else:
        cand = Candidate.from_edge(edge)
    _, reduced, projected = cand.analysis()
    members = tuple(
        Widget(t, cand.path, reduced, projected, cand.mode) for t in cand.eligible(types)
    )
    return CandidateSet(cand.path, reduced, cand.mode, projected, members)


def widget_cost(
    widget: "Widget | CandidateSet | Candidate",
    alphas: Sequence[float] = DEFAULT_ALPHAS,
) -> float:
    """Weighted cost of a widget, or of the cheapest member of a set."""
    if isinstance(widget, Candidate):
        return widget.cost(DEFAULT_TYPES, alphas)
    return widget.cost(alphas)


# --------------------------------------------------------------------------
# interfaces


@dataclass
class Interface:
    """An initial query plus the widget candidates accumulated onto it.

    ``widgets`` maps a candidate's key to the fused candidate; ``covered``
    lists the verified-reachable query pids in discovery order, starting
    with the interface's own; ``parents`` records, per covered pid, which
    already-covered query it was reached from and the widget actuations
    that realize the hop — the replayable evidence of coverage.
    """

    pid: str
    ast: Node
    widgets: dict[tuple, Candidate] = field(default_factory=dict)
    covered: tuple[str, ...] = ()
    parents: dict[str, tuple[str | None, tuple]] = field(default_factory=dict)

    def widget_sum(
        self,
        types: Sequence[WidgetType] = DEFAULT_TYPES,
        alphas: Sequence[float] = DEFAULT_ALPHAS,
    ) -> float:
        return sum(c.cost(types, alphas) for c in self.widgets.values())


def interface_cost(
    interface: "Interface | Iterable",
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    c0: float = DEFAULT_C0,
    types: Sequence[WidgetType] = DEFAULT_TYPES,
) -> float:
    """Fixed overhead ``c0`` plus the summed widget costs.

    Accepts an :class:`Interface` or any iterable of widgets, candidate
    sets, or candidates.
    """
    if isinstance(interface, Interface):
        return c0 + interface.widget_sum(types, alphas)
    total = c0
    for w in interface:
        if isinstance(w, Candidate):
            total += w.cost(types, alphas)
        else:
            total += w.cost(alphas)
    return total


def set_cost(
    interfaces: Iterable,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    c0: float = DEFAULT_C0,
    types: Sequence[WidgetType] = DEFAULT_TYPES,
) -> float:
    """Total cost of an interface set: each pays ``c0`` plus its widgets."""
    return sum(interface_cost(i, alphas, c0, types) for i in interfaces)


# --------------------------------------------------------------------------
# honest coverage: can these widgets actually reproduce that query?


class _TransitionOracle:
    """Memoized per-pair transition facts over one interaction graph.

    For a directed query pair the graph's edges determine a canonical record
    set; whether replaying those records over the source tree reproduces the
    target is independent of any widget pool, so it is computed once and
    remembered.  What *does* depend on the widgets — does every record have
    a widget holding its value? — reduces to a requirement scan: a list of
    ``(widget key, value row)`` pairs that must all be present.  Closure
    checks then cost a few dictionary lookups per attempt.
    """

    def __init__(self, graph: InteractionGraph) -> None:
        self.graph = graph
        self._info: dict[tuple[str, str], tuple | None] = {}
        self._neighbor_order: dict[str, tuple[str, ...]] = {}
        dup_groups: dict[Node, list[str]] = {}
        for pid in graph.nodes:
            dup_groups.setdefault(graph.ast(pid), []).append(pid)
        self.dups: dict[Node, tuple[str, ...]] = {
            ast: tuple(pids) for ast, pids in dup_groups.items()
        }

    def neighbors(self, pid: str) -> tuple[str, ...]:
        got = self._neighbor_order.get(pid)
        if got is None:
            got = tuple(sorted(self.graph.neighbors(pid)))
            self._neighbor_order[pid] = got
        return got

    def check(self, widgets: Mapping[tuple, Candidate], src: str, dst: str) -> tuple | None:
        """Actuation steps for ``src -> dst`` under ``widgets``, else None."""
        pair = (src, dst)
        info = self._info.get(pair, False)
        if info is False:
            info = self._pair_info(src, dst)
            self._info[pair] = info
        if info is None:
            return None
        required, steps = info
        for key, row in required:
            cand = widgets.get(key)
            if cand is None:
                return None
            if row is not None and row not in cand.row_set:
                return None
        return steps

    def _pair_info(self, src: str, dst: str) -> tuple | None:
        """``(required, steps)`` when the hop is structurally sound: the
        canonical record set replays to exactly the target tree.  ``None``
        when no widget pool could ever realize this hop."""
        parts = self._super_edge(src, dst)
        if parts is None:
            return None
        scalar_edges, collection_edges = parts
        src_ast, dst_ast = self.graph.ast(src), self.graph.ast(dst)
        if not scalar_edges and not collection_edges:
            return ((), ()) if src_ast == dst_ast else None

        required: list[tuple] = []
        steps: list[tuple] = []
        records: list[DiffRecord] = []
        try:
            for e in scalar_edges:
                key = (e.path, _template_text(e.template), e.mode)
                value = tuple(e.value)
                if e.mode == "insert":
                    tau1, tau2 = None, bind(e.template, value)
                elif e.mode == "delete":
                    tau1, tau2 = subtree_at(src_ast, e.path), None
                else:
                    tau1 = subtree_at(src_ast, e.path)
                    tau2 = bind(e.template, value)
                records.append(
                    DiffRecord(len(records), e.src_pid, e.dst_pid, e.path, tau1, tau2)
                )
                required.append((key, value))
                steps.append((key, value))
            for e in collection_edges:
                key = (e.path, None, "collection")
                anchor = subtree_at(src_ast, e.path)
                if not anchor.is_list():
                    return None
                element_type = LIST_TYPES[anchor.node_type]
                rebuilt = Node(
                    anchor.node_type,
                    anchor.attrs,
                    tuple(parse_fragment(f, element_type) for f in e.value),
                )
                records.append(
                    DiffRecord(len(records), e.src_pid, e.dst_pid, e.path, anchor, rebuilt)
                )
                if e.value:
                    required.extend((key, (f,)) for f in e.value)
                else:
                    # a rewrite to the empty list selects nothing, but the
                    # widget must still exist; None marks presence-only
                    required.append((key, None))
                steps.append((key, tuple(e.value)))
            result = replay(src_ast, DiffTable("", "", tuple(records)))
        except QueryDeckError:
            return None
        if result != dst_ast:
            return None
        return tuple(required), tuple(steps)

    def _super_edge(
        self, src: str, dst: str
    ) -> tuple[list[InteractionEdge], list[InteractionEdge]] | None:
        """Deduplicated, subsumption-filtered records for ``src -> dst``.

        Several statements often describe the same concrete edit, so records
        are deduplicated on their full label; a scalar record that falls
        inside a collection rewrite's list (one statement sees element edits,
        another the whole list changing) yields to the collection, and a
        scalar record nested under another's replaced subtree is dropped as
        redundant.  Returns None when the graph offers no transition at all.
        """
        edges = self.graph.transition_edges(src, dst, cache=False)
        if not edges:
            return None
        scalars: dict[tuple, InteractionEdge] = {}
        collections: dict[tuple, InteractionEdge] = {}
        for e in edges:
            if e.mode == "identity":
                continue
            if e.mode == "collection":
                collections.setdefault((e.path, e.value), e)
            else:
                scalars.setdefault((e.path, e.template, e.mode, e.value), e)
        anchors = [e.path for e in collections.values()]
        kept = [
            e
            for e in scalars.values()
            if not any(e.path[: len(a)] == a for a in anchors)
        ]
        replace_paths = [e.path for e in kept if e.mode == "replace"]
        final = [
            e
            for e in kept
            if not any(
                len(p) < len(e.path) and e.path[: len(p)] == p for p in replace_paths
            )
        ]
        return final, list(collections.values())


def _expand_closure(
    widgets: Mapping[tuple, Candidate],
    oracle: _TransitionOracle,
    seeds: Mapping[str, tuple[str | None, tuple]],
) -> dict[str, tuple[str | None, tuple]]:
    """Grow a verified coverage map outward from ``seeds``.

    Breadth-first over the graph's adjacency: a query joins the closure when
    some covered query has a verified widget path to it.  Seeds count as
    already verified (widget pools only grow, so previously verified hops
    stay valid); queries whose tree equals a covered one join for free.
    Returns pid -> (parent pid, actuation steps) in discovery order.
    """
    graph = oracle.graph
    covered: dict[str, tuple[str | None, tuple]] = dict(seeds)
    queue: deque[str] = deque(covered)

    def admit(pid: str, parent: str | None, steps: tuple) -> None:
        covered[pid] = (parent, steps)
        queue.append(pid)
        for twin in oracle.dups.get(graph.ast(pid), ()):
            if twin not in covered:
                covered[twin] = (pid, ())
                queue.append(twin)

    for pid in list(covered):
        for twin in oracle.dups.get(graph.ast(pid), ()):
            if twin not in covered:
                covered[twin] = (pid, ())
                queue.append(twin)

    if not widgets:
        return covered  # only equal trees are reachable without widgets

    while queue:
        src = queue.popleft()
        for dst in oracle.neighbors(src):
            if dst in covered:
                continue
            steps = oracle.check(widgets, src, dst)
            if steps is not None:
                admit(dst, src, steps)
    return covered


def closure(interface: Interface, graph: InteractionGraph) -> set[str]:
    """Every query pid the interface verifiably reaches from its initial.

    Recomputed from scratch — the interface's cached ``covered`` is ignored —
    so this doubles as an audit of the coverage the synthesis reported.
    """
    oracle = _TransitionOracle(graph)
    seeds = {interface.pid: (None, ())}
    return set(_expand_closure(interface.widgets, oracle, seeds))


# --------------------------------------------------------------------------
# greedy synthesis


@dataclass
class InterfaceSet:
    """Synthesis result: interfaces ordered by descending coverage.

    ``coverage`` counts covered queries against every log entry, parse
    failures included, so an unparseable log line caps what any widget set
    can reach.  ``cost`` is the full set cost at the run's weights.
    """

    interfaces: list[Interface]
    alphas: tuple[float, ...]
    c0: float
    gamma: float
    coverage: float
    cost: float
    types: tuple[WidgetType, ...] = DEFAULT_TYPES

    @property
    def coverage_met(self) -> bool:
        return self.coverage + 1e-12 >= self.gamma

    def resolved(self) -> list[tuple[Interface, list[Widget]]]:
        """Each interface with its candidates resolved to concrete widgets,
        in a per-interface order that is stable across runs."""
        out = []
        for iface in self.interfaces:
            ordered = sorted(
                iface.widgets.values(),
                key=lambda c: (c.path, c.mode, str(c.key[1]), len(c.rows)),
            )
            out.append((iface, [c.resolve(self.types, self.alphas) for c in ordered]))
        return out


def _bridge_pair(
    graph: InteractionGraph,
    covered_a: Sequence[str],
    covered_b: Sequence[str],
) -> tuple[str, str] | None:
    """Lexicographically first adjacent ``(a-side, b-side)`` pair, or None."""
    set_a, set_b = set(covered_a), set(covered_b)
    best: tuple[str, str] | None = None
    # scan from the smaller side; adjacency is symmetric
    if len(set_b) < len(set_a):
        for v in covered_b:
            hits = graph.neighbors(v) & set_a
            if hits:
                pair = (min(hits), v)
                if best is None or pair < best:
                    best = pair
    else:
        for u in covered_a:
            hits = graph.neighbors(u) & set_b
            if hits:
                pair = (u, min(hits))
                if best is None or pair < best:
                    best = pair
    return best


def _anchors_in(tree: Node, cand: Candidate) -> bool:
    """Whether the candidate's action site exists in ``tree``: the node at
    its path (a list node for collections), or a valid insertion slot."""
    path = cand.path
    try:
        if cand.mode == "insert":
            if not path:
                return False
            parent = subtree_at(tree, path[:-1])
            return parent.is_list() and path[-1] <= len(parent.children)
        anchor = subtree_at(tree, path)
    except QueryDeckError:
        return False
    return anchor.is_list() if cand.mode == "collection" else True


def _merged_widgets(
    a: Interface, b: Interface, bridge: Iterable[InteractionEdge], initial: Node
) -> dict[tuple, Candidate]:
    """Pooled candidates for a merge rooted at ``initial``.

    Only candidates whose action site exists in the initial tree survive:
    the emitted artifact promises that every widget path resolves in its
    interface's initial query, so candidates anchored solely in other trees
    must stay out of the pool.
    """
    merged: dict[tuple, Candidate] = {}
    for cand in a.widgets.values():
        if _anchors_in(initial, cand):
            merged[cand.key] = cand
    for cand in b.widgets.values():
        if _anchors_in(initial, cand):
            cur = merged.get(cand.key)
            merged[cand.key] = cand if cur is None else cur.fuse(cand)
    for e in bridge:
        if e.mode == "identity":
            continue
        cand = Candidate.from_edge(e)
        if not _anchors_in(initial, cand):
            continue
        cur = merged.get(cand.key)
        merged[cand.key] = cand if cur is None else cur.fuse(cand)
    return merged


def greedy_synthesize(
    graph: InteractionGraph,
    *,
    types: Sequence[WidgetType] = DEFAULT_TYPES,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    gamma: float = 1.0,
    c0: float = DEFAULT_C0,
) -> InterfaceSet:
    """Contract one-interface-per-query into few interfaces, greedily.

    Each round evaluates every connected pair of interfaces: merging pools
    their widgets and adds candidates for one representative connecting hop
    (both directions), keeping only candidates anchored in the merge's
    initial tree, and the pair with the largest cost drop — the two
    separate costs plus the freed ``c0``, minus the merged cost — is taken,
    ties broken toward larger combined coverage, then lexicographically.  A
    merge is committed only when the merged widget set still verifiably
    covers everything both halves covered (orientations tried best gain
    first); otherwise the pair is set aside until one side changes.  The
    search stops when no merge reduces total cost.
    """
    types = tuple(types)
    alphas = tuple(alphas)
    for t in types:
        if len(alphas) != len(t.cost_fns):
            raise WeightMismatch(
                f"{len(alphas)} weights for {len(t.cost_fns)} cost families"
            )

    oracle = _TransitionOracle(graph)
    interfaces: dict[str, Interface] = {}
    covering: dict[str, set[str]] = {}
    for pid in graph.nodes:
        iface = Interface(pid, graph.ast(pid))
        parents = _expand_closure({}, oracle, {pid: (None, ())})
        iface.covered = tuple(parents)
        iface.parents = parents
        interfaces[pid] = iface
        for member in iface.covered:
            covering.setdefault(member, set()).add(pid)

    version = {iid: 0 for iid in interfaces}
    heap: list[tuple] = []

    def outside_neighbors(iface: Interface) -> set[str]:
        members = set(iface.covered)
        out: set[str] = set()
        for pid in iface.covered:
            out |= graph.neighbors(pid)
        return out - members

    def partners_of(iface: Interface, iid: str) -> set[str]:
        """Interfaces overlapping this one's coverage or adjacent to it."""
        out: set[str] = set()
        for pid in iface.covered:
            out |= covering.get(pid, set())
        for pid in outside_neighbors(iface):
            out |= covering.get(pid, set())
        out.discard(iid)
        return out

    def evaluate(a: Interface, b: Interface) -> list[tuple[float, Interface, dict]]:
        """Cost-reducing merge orientations for the pair, larger root first.

        Each orientation roots the merge at one side's initial query and
        pools only the candidates anchored in that tree, so the two
        orientations generally differ in both widgets and gain.  Larger
        initial trees anchor more of the pooled candidates, so they are
        tried first; gain breaks ties.
        """
        pair = _bridge_pair(graph, a.covered, b.covered)
        if pair is None:
            # interfaces sharing a covered query merge without any bridge:
            # the shared query already anchors the other side's chains
            if set(a.covered).isdisjoint(b.covered):
                return []
            bridge: list[InteractionEdge] = []
        else:
            u, v = pair
            bridge = list(graph.transition_edges(u, v)) + list(
                graph.transition_edges(v, u)
            )
        base = a.widget_sum(types, alphas) + b.widget_sum(types, alphas) + c0
        options = []
        for left in (a, b):
            merged = _merged_widgets(a, b, bridge, left.ast)
            gain = base - sum(c.cost(types, alphas) for c in merged.values())
            if gain > 0:
                options.append((gain, left, merged))
        options.sort(key=lambda item: (-item[1].ast.size(), -item[0], item[1].pid))
        return options

    def push(i: str, j: str) -> None:
        if j < i:
            i, j = j, i
        options = evaluate(interfaces[i], interfaces[j])
        if not options:
            return
        gain = options[0][0]
        union = len(set(interfaces[i].covered) | set(interfaces[j].covered))
        heapq.heappush(heap, (-gain, -union, (i, j), version[i], version[j]))

    seen_pairs: set[tuple[str, str]] = set()
    for iid, iface in interfaces.items():
        for other in partners_of(iface, iid):
            pair = (iid, other) if iid < other else (other, iid)
            if pair not in seen_pairs:
                seen_pairs.add(pair)
                push(*pair)

    while heap:
        _, _, (i, j), vi, vj = heapq.heappop(heap)
        if (
            i not in interfaces
            or j not in interfaces
            or version[i] != vi
            or version[j] != vj
        ):
            continue
        a, b = interfaces[i], interfaces[j]
        options = evaluate(a, b)
        if not options:
            continue

        union = set(a.covered) | set(b.covered)
        committed: Interface | None = None
        for _, left, merged in options:
            parents = _expand_closure(merged, oracle, dict(left.parents))
            if union <= set(parents):
                committed = Interface(left.pid, left.ast, merged, tuple(parents), parents)
                break
        if committed is None:
            log.debug("merge of %s and %s rejected: coverage would regress", i, j)
            continue

        del interfaces[i], interfaces[j]
        for member in a.covered:
            covering[member].discard(i)
        for member in b.covered:
            covering[member].discard(j)
        new_id = committed.pid
        interfaces[new_id] = committed
        version[new_id] = version.get(new_id, 0) + 1
        for member in committed.covered:
            covering.setdefault(member, set()).add(new_id)
        for other in sorted(partners_of(committed, new_id)):
            if other in interfaces:
                push(new_id, other)

    result = sorted(interfaces.values(), key=lambda f: (-len(f.covered), f.pid))
    covered_union: set[str] = set()
    for iface in result:
        covered_union.update(iface.covered)
    total_entries = len(graph.entries)
    coverage = len(covered_union) / total_entries if total_entries else 1.0
    total = set_cost(result, alphas, c0, types)
    out = InterfaceSet(result, alphas, c0, gamma, coverage, total, types)
    if not out.coverage_met:
        log.warning(
            "requested coverage %.3f but only %.3f is reachable", gamma, coverage
        )
    return out
