"""End-to-end run: mine a query log, synthesize interfaces, emit and apply them.

The emitted document (the *interface spec*) is plain JSON describing every
synthesized interface: its initial query, its widgets (type, tree path,
parameterized template, option domain, cost) and the log queries it covers.
A companion *trace* document records, per covered query, the widget
actuations that rebuild it from the interface's initial query — replayable
evidence behind the coverage number, kept alongside the spec so the claim
can be audited without re-running synthesis.

``apply_widgets`` is the runtime half: it folds a widget state into an
interface's initial query and returns the resulting SQL and tree.  It is a
pure function of ``(spec, interface id, state)`` — the service layer wraps
it, but nothing here talks to a database or network.
"""
from __future__ import annotations

import json
import random
from pathlib import Path as FsPath
from typing import Mapping, Sequence

from .diff import DiffRecord, DiffTable, replay
from .errors import ConfigError, CoverageUnreachable, DomainViolation, QueryDeckError
from .mining import (
    InteractionEdge,
    InteractionGraph,
    PairStrategy,
    bind,
    build_graph,
    builtin_statements,
    load_log,
)
from .pilang import Statement, parse_statements
from .sqlast import (
    LIST_TYPES,
    Node,
    Param,
    format_path,
    from_json,
    parse_canonical,
    parse_fragment,
    parse_path,
    substitute,
    subtree_at,
    to_json,
    unparse,
)
from .widgets import (
    DEFAULT_ALPHAS,
    DEFAULT_C0,
    DEFAULT_TYPES,
    Candidate,
    Interface,
    InterfaceSet,
    WidgetType,
    greedy_synthesize,
)

__all__ = [
    "apply_widgets",
    "graph_document",
    "load_graph_document",
    "load_spec",
    "run_pipeline",
    "spec_document",
    "trace_document",
    "trace_path",
    "validate_spec",
    "verify_trace",
    "write_json",
]

#: statement-file optimization switches accepted by :func:`run_pipeline`
OPT_MODES = ("none", "clique", "template", "both")


# --------------------------------------------------------------------------
# document emission


def _ordered_candidates(iface: Interface) -> list[Candidate]:
    """The interface's candidates in a stable, content-determined order.

    Widget ids (``w0``, ``w1``, …) are positions in this order, so the spec
    and the trace must both derive it the same way.
    """
    return sorted(
        iface.widgets.values(),
        key=lambda c: (c.path, c.mode, str(c.key[1]), len(c.rows)),
    )


def spec_document(result: InterfaceSet, graph: InteractionGraph) -> dict:
    """Render a synthesis result as the JSON-ready interface spec.

    ``meta`` carries the run parameters and outcomes; ``tab_order`` lists
    interface ids in display order (descending closure size) so a client
    can lay out tabs without re-deriving the ranking.  Each widget carries
    the reduced template (holes ``$0..$k-1`` over the varying positions)
    and the projected option domain; constant-action widgets (plain
    buttons, deletions) have an empty or degenerate domain.
    """
    interfaces = []
    for idx, iface in enumerate(result.interfaces):
        widgets = []
        for w_idx, cand in enumerate(_ordered_candidates(iface)):
            widget = cand.resolve(result.types, result.alphas)
            reduced = cand.analysis()[1]
            widgets.append(
                {
                    "id": f"w{w_idx}",
                    "type_id": widget.widget_type.type_id,
                    "path": format_path(cand.path),
                    "mode": cand.mode,
                    "template": to_json(reduced) if reduced is not None else None,
                    "domain": [list(row) for row in widget.domain],
                    "cost": widget.cost(result.alphas),
                }
            )
        interfaces.append(
            {
                "id": f"i{idx}",
                "initial_query": unparse(iface.ast),
                "closure": list(iface.covered),
                "widgets": widgets,
            }
        )
    return {
        "meta": {
            "gamma": result.gamma,
            "alphas": list(result.alphas),
            "c0": result.c0,
            "coverage": result.coverage,
            "cost": result.cost,
            "log_size": len(graph.entries),
            "tab_order": [entry["id"] for entry in interfaces],
        },
        "interfaces": interfaces,
    }


def trace_document(result: InterfaceSet) -> dict:
    """Render the coverage evidence: per interface, per covered query, the
    parent query it was reached from and the widget actuations of that hop.

    Values are projected onto each widget's domain (what a user would
    actually select), so the trace replays through :func:`apply_widgets`
    semantics alone — no synthesis internals needed.
    """
    out = {}
    for idx, iface in enumerate(result.interfaces):
        ordered = _ordered_candidates(iface)
        ids = {cand.key: f"w{i}" for i, cand in enumerate(ordered)}
        hops = {}
        for pid, (parent, steps) in iface.parents.items():
            rendered = []
            for key, value in steps:
                cand = iface.widgets[key]
                projected = value if cand.mode == "collection" else cand.project(value)
                rendered.append({"widget": ids[key], "value": list(projected)})
            hops[pid] = {"parent": parent, "steps": rendered}
        out[f"i{idx}"] = {"initial": iface.pid, "hops": hops}
    return {"interfaces": out}


def graph_document(graph: InteractionGraph) -> dict:
    """Render a mined graph as self-contained JSON.

    Clique-compressed edges are materialized so the document can be built
    back into a graph without the statement set that produced it; synthesis
    over the round-tripped graph behaves identically.
    """
    return {
        "entries": [{"pid": e.pid, "query": e.source} for e in graph.entries],
        "edges": [e.to_json() for e in graph.derivable_edges()],
        "stats": dict(graph.stats),
    }


def load_graph_document(doc: Mapping) -> InteractionGraph:
    """Rebuild an interaction graph from :func:`graph_document` output."""
    lines = [
        json.dumps({"pid": e["pid"], "query": e["query"]}) for e in doc["entries"]
    ]
    entries = load_log(lines)
    edges = []
    for d in doc["edges"]:
        template = None if d["template"] is None else from_json(d["template"])
        edges.append(
            InteractionEdge(
                d["src"],
                d["dst"],
                d["statement"],
                parse_path(d["path"]),
                template,
                tuple(d["value"]),
                d["mode"],
            )
        )
    parsed = [e for e in entries if e.ast is not None]
    return InteractionGraph(
        entries=entries,
        nodes=[e.pid for e in parsed],
        edges=edges,
        cliques=[],
        stats=dict(doc.get("stats", {})),
        _asts={e.pid: e.ast for e in parsed},
    )


def write_json(document: Mapping, path: str | FsPath) -> None:
    """Serialize a document with a fixed layout, so identical runs produce
    byte-identical files."""
    FsPath(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")


def load_spec(path: str | FsPath) -> dict:
    return json.loads(FsPath(path).read_text(encoding="utf-8"))


def trace_path(out: str | FsPath) -> FsPath:
    """Where the trace lives relative to its spec file."""
    p = FsPath(out)
    if p.suffix == ".json":
        return p.with_suffix(".trace.json")
    return FsPath(str(p) + ".trace.json")


# --------------------------------------------------------------------------
# widget application


def _interface(spec: Mapping, interface_id: str) -> Mapping:
    for iface in spec["interfaces"]:
        if iface["id"] == interface_id:
            return iface
    raise ConfigError(f"unknown interface id {interface_id!r}")


def _template_params(template: Node | None) -> int:
    """Number of holes in a template (0 for constant or absent templates)."""
    if template is None:
        return 0
    seen: set[int] = set()
    for _, sub in template.walk():
        for _, value in sub.attrs:
            if isinstance(value, Param):
                seen.add(value.index)
    return max(seen) + 1 if seen else 0


def _coerce_free_text(domain: Sequence, value: tuple) -> tuple:
    """Best-effort typing for free-form input: when the mined options at a
    position are numeric, numeric-looking text is converted so it lands in
    the tree as the same literal kind; anything unconvertible passes
    through as given (free-form means the domain does not constrain it)."""
    if not domain:
        return value
    sample = domain[0]
    out = []
    for i, v in enumerate(value):
        target = sample[i] if i < len(sample) else None
        if (
            isinstance(target, bool)
            or not isinstance(target, (int, float))
            or isinstance(v, (int, float))
        ):
            out.append(v)
            continue
        try:
            out.append(int(v) if isinstance(target, int) else float(v))
        except (TypeError, ValueError):
            out.append(v)
    return tuple(out)


def _check_value(widget: Mapping, raw: object) -> tuple:
    """Normalize one state entry against its widget; raises
    :class:`DomainViolation` naming the widget and the offending value."""
    wid = widget["id"]
    if widget["mode"] == "collection":
        if isinstance(raw, (str, bytes)) or not isinstance(raw, Sequence):
            raise DomainViolation(wid, raw)
        chosen = tuple(raw)
        options = {row[0] for row in widget["domain"]}
        for v in chosen:
            if v not in options:
                raise DomainViolation(wid, v)
        return chosen
    params = _template_params(
        from_json(widget["template"]) if widget["template"] is not None else None
    )
    if params == 0:
        # constant action (plain button press / deletion): any of the usual
        # "pressed" spellings is accepted, nothing else
        if raw is True or raw is None or raw == [] or raw == ():
            return ()
        raise DomainViolation(wid, raw)
    value = tuple(raw) if isinstance(raw, (list, tuple)) else (raw,)
    if len(value) != params:
        raise DomainViolation(wid, raw)
    if widget["type_id"] == "textbox":
        return _coerce_free_text(widget["domain"], value)
    if list(value) not in [list(row) for row in widget["domain"]]:
        raise DomainViolation(wid, raw)
    return value


def _apply_action(current: Node, widget: Mapping, value: tuple) -> Node:
    """One widget actuation against the given tree."""
    path = parse_path(widget["path"])
    mode = widget["mode"]
    if mode == "collection":
        anchor = subtree_at(current, path)
        if not anchor.is_list():
            raise ConfigError(
                f"widget {widget['id']!r} targets a non-list node {anchor.node_type!r}"
            )
        element = LIST_TYPES[anchor.node_type]
        rebuilt = Node(
            anchor.node_type,
            anchor.attrs,
            tuple(parse_fragment(v, element) for v in value),
        )
        return substitute(current, path, rebuilt)
    if mode == "delete":
        return substitute(current, path, None)
    tau = bind(from_json(widget["template"]), tuple(value))
    return substitute(current, path, tau, insert=(mode == "insert"))


#: application rank within one depth level, mirroring the canonical diff
#: order: in-place rewrites first, then deletions (deepest sibling first, so
#: earlier removals never shift a pending deletion's index), insertions last
#: in ascending order against the post-deletion list
_MODE_RANK = {"replace": 0, "collection": 0, "delete": 1, "insert": 2}


def apply_widgets(
    spec: Mapping, interface_id: str, state: Mapping[str, object]
) -> tuple[str, Node]:
    """Fold a widget state into an interface's initial query.

    Widgets apply in ascending path depth — shallow first, since deeper
    paths may be created by shallower structural widgets — with a fixed
    within-depth order (see ``_MODE_RANK``).  Unknown ids raise
    :class:`ConfigError`; out-of-domain values raise
    :class:`DomainViolation`; a path that no longer resolves raises
    :class:`PathNotFound` — reported, never silently skipped.  Pure: the
    spec and state are never mutated.
    """
    iface = _interface(spec, interface_id)
    widgets = {w["id"]: w for w in iface["widgets"]}
    for wid in state:
        if wid not in widgets:
            raise ConfigError(
                f"unknown widget id {wid!r} for interface {interface_id!r}"
            )
    actions = []
    for wid, widget in widgets.items():
        if wid in state:
            actions.append((widget, _check_value(widget, state[wid])))

    def order(item: tuple) -> tuple:
        widget, _ = item
        path = parse_path(widget["path"])
        rank = _MODE_RANK[widget["mode"]]
        ordkey = tuple(-i for i in path) if widget["mode"] == "delete" else path
        return (len(path), rank, ordkey)

    actions.sort(key=order)
    current = parse_canonical(iface["initial_query"])
    for widget, value in actions:
        current = _apply_action(current, widget, value)
    return unparse(current), current


# --------------------------------------------------------------------------
# spec invariants: executability sampling and trace replay


def validate_spec(spec: Mapping, *, samples: int = 100, seed: int = 0) -> int:
    """Sample widget states per interface and require the applied SQL to
    parse; returns the number of states checked.

    The sample pool is every single-widget actuation over its domain plus
    one joint assignment of all non-structural widgets (insert/delete
    combinations only arise through trace-verified sequences, so they are
    exercised per widget, not jointly).  Pools larger than ``samples`` are
    subsampled with a seeded RNG, keeping runs deterministic.
    """
    checked = 0
    for iface in spec["interfaces"]:
        rng = random.Random(f"{seed}:{iface['id']}")
        widgets = iface["widgets"]
        states: list[dict] = []
        joint: dict[str, object] = {}
        for w in widgets:
            wid = w["id"]
            if w["mode"] == "collection":
                options = [row[0] for row in w["domain"]]
                states.append({wid: options})
                if len(options) > 1:
                    states.append({wid: [options[0]]})
                keep = rng.randint(1, len(options))
                chosen = set(rng.sample(options, keep))
                joint[wid] = [o for o in options if o in chosen]
            elif w["domain"] and w["template"] is not None:
                for row in w["domain"]:
                    states.append({wid: list(row)})
                if w["mode"] == "replace":
                    joint[wid] = list(rng.choice(w["domain"]))
            else:
                states.append({wid: True})
                if w["mode"] == "replace":
                    joint[wid] = True
        if joint:
            states.append(joint)
        if len(states) > samples:
            states = rng.sample(states, samples)
        for state in states:
            sql, _ = apply_widgets(spec, iface["id"], state)
            parse_canonical(sql)
            checked += 1
    return checked


def _hop_target(current: Node, actions: Sequence[tuple[Mapping, tuple]]) -> Node:
    """Fold one trace hop — a set of widget actuations recorded together —
    into the hop's source tree.

    The actuations of one hop were mined from a single structural diff, so
    their paths are coordinated as one edit set, not as independent widget
    states: they replay under the canonical diff order (deepest parents
    first; within a parent, in-place edits by descending path, then
    insertions ascending), which keeps every path pointing at the node it
    was recorded against even when siblings are removed.
    """
    records = []
    for did, (widget, value) in enumerate(actions):
        path = parse_path(widget["path"])
        mode = widget["mode"]
        if mode == "collection":
            anchor = subtree_at(current, path)
            if not anchor.is_list():
                raise ConfigError(
                    f"widget {widget['id']!r} targets a non-list node"
                    f" {anchor.node_type!r}"
                )
            element = LIST_TYPES[anchor.node_type]
            rebuilt = Node(
                anchor.node_type,
                anchor.attrs,
                tuple(parse_fragment(v, element) for v in value),
            )
            records.append(DiffRecord(did, "", "", path, anchor, rebuilt))
        elif mode == "delete":
            records.append(
                DiffRecord(did, "", "", path, subtree_at(current, path), None)
            )
        elif mode == "insert":
            tau = bind(from_json(widget["template"]), tuple(value))
            records.append(DiffRecord(did, "", "", path, None, tau))
        else:
            tau = bind(from_json(widget["template"]), tuple(value))
            records.append(
                DiffRecord(did, "", "", path, subtree_at(current, path), tau)
            )
    return replay(current, DiffTable("", "", tuple(records)))


def verify_trace(
    spec: Mapping, trace: Mapping, targets: Mapping[str, Node]
) -> int:
    """Replay every hop chain in the trace and require each covered query's
    rebuilt tree to equal its logged tree; returns the number verified.

    Hops apply sequentially — each hop's actuations fold into the *current*
    tree, not the initial one — which is exactly how a user walking the
    interface would reach the query.
    """
    count = 0
    for iface in spec["interfaces"]:
        data = trace["interfaces"].get(iface["id"])
        if data is None:
            raise ConfigError(f"trace missing interface {iface['id']!r}")
        hops = data["hops"]
        if set(hops) != set(iface["closure"]):
            raise ConfigError(
                f"trace for interface {iface['id']!r} does not match its closure"
            )
        widgets = {w["id"]: w for w in iface["widgets"]}
        rebuilt: dict[str, Node] = {}

        def resolve(pid: str) -> Node:
            chain = []
            cursor: str | None = pid
            while cursor is not None and cursor not in rebuilt:
                chain.append(cursor)
                cursor = hops[cursor]["parent"]
            for hop_pid in reversed(chain):
                parent = hops[hop_pid]["parent"]
                current = (
                    parse_canonical(iface["initial_query"])
                    if parent is None
                    else rebuilt[parent]
                )
                actions = [
                    (
                        widgets[step["widget"]],
                        _check_value(widgets[step["widget"]], step["value"]),
                    )
                    for step in hops[hop_pid]["steps"]
                ]
                try:
                    rebuilt[hop_pid] = _hop_target(current, actions)
                except QueryDeckError as exc:
                    raise ConfigError(
                        f"trace hop for query {hop_pid!r} does not fit: {exc}"
                    ) from exc
            return rebuilt[pid]

        for pid in hops:
            want = targets.get(pid)
            if want is None or resolve(pid) != want:
                raise ConfigError(
                    f"trace for query {pid!r} does not replay to the logged tree"
                )
            count += 1
    return count


# --------------------------------------------------------------------------
# the pipeline


def run_pipeline(
    log_path: str | FsPath,
    pilang_path: str | FsPath | None = None,
    *,
    out: str | FsPath | None = None,
    gamma: float = 1.0,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    c0: float = DEFAULT_C0,
    pairs: str = "all",
    opt: str = "template",
    types: Sequence[WidgetType] = DEFAULT_TYPES,
    seed: int = 0,
) -> dict:
    """Mine a log, synthesize interfaces, and emit the spec and its trace.

    ``pilang_path`` of ``None`` selects the built-in statement set; an
    empty statement file yields no edges, hence one singleton interface
    per distinct query.  When ``out`` is given, the spec is written there
    and the trace next to it (:func:`trace_path`) *before* the coverage
    gate, so a :class:`CoverageUnreachable` still leaves the best spec on
    disk for inspection.  Identical inputs, options and seed produce
    byte-identical files.
    """
    if opt not in OPT_MODES:
        raise ConfigError(f"unknown optimization mode {opt!r}; pick one of {OPT_MODES}")
    entries = load_log(str(log_path))
    if pilang_path is None:
        statements: list[Statement] = builtin_statements()
    else:
        statements = parse_statements(
            FsPath(pilang_path).read_text(encoding="utf-8")
        )
    graph = build_graph(
        entries,
        statements,
        PairStrategy(pairs),
        clique=opt in ("clique", "both"),
        template=opt in ("template", "both"),
    )
    result = greedy_synthesize(
        graph, types=tuple(types), alphas=tuple(alphas), gamma=gamma, c0=c0
    )
    spec = spec_document(result, graph)
    trace = trace_document(result)
    validate_spec(spec, seed=seed)
    verify_trace(spec, trace, {pid: graph.ast(pid) for pid in graph.nodes})
    if out is not None:
        write_json(spec, out)
        write_json(trace, trace_path(out))
    if not result.coverage_met:
        raise CoverageUnreachable(gamma, result.coverage)
    return spec
