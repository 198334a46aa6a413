"""End-to-end tests: log in, interface document out, widget states applied."""
from __future__ import annotations

import json

import pytest

from querydeck.errors import (
    ConfigError,
    CoverageUnreachable,
    DomainViolation,
    PathNotFound,
)
from querydeck.mining import (
    PairStrategy,
    build_graph,
    builtin_statements,
    load_log,
)
from querydeck.olapgen import OlapGenConfig, generate_olap_log
from querydeck.pipeline import (
    apply_widgets,
    graph_document,
    load_graph_document,
    load_spec,
    run_pipeline,
    spec_document,
    trace_document,
    trace_path,
    validate_spec,
    verify_trace,
)
from querydeck.sqlast import parse_canonical, parse_path, subtree_at, unparse
from querydeck.widgets import greedy_synthesize

from helpers import FIG_SQL_1, FIG_SQL_2

# Two statements over the two-query demo log.  Each names one concern (the
# projected column, the filter group); the second binding soaks up the other
# clause so the pair's full diff is accounted for by both statements.
PAIRED_STMTS = """\
FROM Project/ProjClause/ColExpr AS P, Where/Or AS S
MATCH change-projection(P)

FROM Where/Or AS W, Project/ProjClause/ColExpr AS S
MATCH change-filter-group(W)
"""


def write_jsonl(path, queries, pids=None):
    with open(path, "w") as fh:
        for i, q in enumerate(queries):
            pid = pids[i] if pids else f"q{i:04d}"
            fh.write(json.dumps({"pid": pid, "query": q}) + "\n")
    return path


@pytest.fixture(scope="module")
def two_query_spec(tmp_path_factory):
    d = tmp_path_factory.mktemp("twoq")
    log = write_jsonl(d / "log.jsonl", [FIG_SQL_1, FIG_SQL_2], ["f1", "f2"])
    pil = d / "stmts.pil"
    pil.write_text(PAIRED_STMTS)
    return run_pipeline(log, pil, pairs="all", opt="none")


def olap_log_file(path, seed, steps):
    entries = generate_olap_log(OlapGenConfig(seed=seed, steps=steps))
    return write_jsonl(path, [e.source for e in entries], [e.pid for e in entries])


# --------------------------------------------------------------------------
# the two-query demo log


def test_two_query_log_contracts_to_one_interface(two_query_spec):
    spec = two_query_spec
    assert len(spec["interfaces"]) == 1
    iface = spec["interfaces"][0]
    assert iface["initial_query"] == FIG_SQL_1
    assert sorted(iface["closure"]) == ["f1", "f2"]
    assert spec["meta"]["coverage"] == 1.0
    assert spec["meta"]["log_size"] == 2

    widgets = {w["path"]: w for w in iface["widgets"]}
    assert set(widgets) == {"0/1/0", "2/0"}
    proj = widgets["0/1/0"]
    filt = widgets["2/0"]
    assert proj["type_id"] == "toggle" and filt["type_id"] == "toggle"
    assert proj["domain"] == [["costs"], ["sales"]]
    assert filt["domain"] == [["EUR"], ["USA"]]
    # toggle over two options costs nothing to scan and little to use
    assert proj["cost"] == pytest.approx(0.1)
    assert spec["meta"]["cost"] == pytest.approx(1.2)


def test_two_widget_state_reproduces_other_query(two_query_spec):
    iface = two_query_spec["interfaces"][0]
    by_path = {w["path"]: w["id"] for w in iface["widgets"]}
    state = {by_path["0/1/0"]: ["costs"], by_path["2/0"]: ["EUR"]}
    sql, ast = apply_widgets(two_query_spec, iface["id"], state)
    assert sql == FIG_SQL_2
    assert ast == parse_canonical(FIG_SQL_2)


def test_empty_state_returns_initial_query(two_query_spec):
    iface = two_query_spec["interfaces"][0]
    sql, ast = apply_widgets(two_query_spec, iface["id"], {})
    assert sql == FIG_SQL_1
    assert ast == parse_canonical(FIG_SQL_1)


def test_every_widget_path_resolves_in_initial_tree(two_query_spec):
    for iface in two_query_spec["interfaces"]:
        tree = parse_canonical(iface["initial_query"])
        for w in iface["widgets"]:
            path = parse_path(w["path"])
            if w["mode"] == "insert":
                parent = subtree_at(tree, path[:-1])
                assert parent.is_list() and path[-1] <= len(parent.children)
            else:
                subtree_at(tree, path)  # raises if unresolved


def test_spec_round_trips_through_json(two_query_spec):
    assert json.loads(json.dumps(two_query_spec)) == two_query_spec


# --------------------------------------------------------------------------
# degenerate inputs


def test_no_statements_yields_one_interface_per_query(tmp_path):
    queries = [
        "SELECT a FROM t",
        "SELECT b FROM t",
        "SELECT a, b FROM t WHERE a = 1",
        "SELECT count(a) FROM u GROUP BY b",
        "SELECT a FROM t ORDER BY a DESC LIMIT 3",
    ]
    log = write_jsonl(tmp_path / "log.jsonl", queries)
    pil = tmp_path / "empty.pil"
    pil.write_text("")
    spec = run_pipeline(log, pil)
    assert len(spec["interfaces"]) == len(queries)
    assert spec["meta"]["coverage"] == 1.0
    assert spec["meta"]["cost"] == pytest.approx(len(queries) * spec["meta"]["c0"])
    for iface in spec["interfaces"]:
        assert iface["widgets"] == []
        assert len(iface["closure"]) == 1


def test_unparseable_line_makes_full_coverage_unreachable(tmp_path):
    log = write_jsonl(tmp_path / "log.jsonl", ["SELECT a FROM t", "NOT SQL AT ALL ((("])
    out = tmp_path / "spec.json"
    with pytest.raises(CoverageUnreachable) as exc:
        run_pipeline(log, out=out, gamma=1.0)
    assert exc.value.requested == 1.0
    assert exc.value.achievable == pytest.approx(0.5)
    # the best document is still written before the gate fires
    written = load_spec(out)
    assert written["meta"]["coverage"] == pytest.approx(0.5)
    assert trace_path(out).exists()


def test_lower_threshold_accepts_partial_coverage(tmp_path):
    log = write_jsonl(tmp_path / "log.jsonl", ["SELECT a FROM t", "NOT SQL AT ALL ((("])
    spec = run_pipeline(log, gamma=0.5)
    assert spec["meta"]["coverage"] == pytest.approx(0.5)


def test_unknown_optimization_mode_rejected(tmp_path):
    log = write_jsonl(tmp_path / "log.jsonl", ["SELECT a FROM t"])
    with pytest.raises(ConfigError):
        run_pipeline(log, opt="fastest")


# --------------------------------------------------------------------------
# determinism


def test_same_inputs_produce_byte_identical_documents(tmp_path):
    log = olap_log_file(tmp_path / "log.jsonl", seed=5, steps=40)
    outs = []
    for name in ("one", "two"):
        out = tmp_path / name / "spec.json"
        out.parent.mkdir()
        run_pipeline(log, pairs="seq", opt="template", seed=0, out=out)
        outs.append(out)
    assert outs[0].read_bytes() == outs[1].read_bytes()
    assert trace_path(outs[0]).read_bytes() == trace_path(outs[1]).read_bytes()


def test_graph_document_round_trip_synthesizes_identically(tmp_path):
    log = olap_log_file(tmp_path / "log.jsonl", seed=7, steps=30)
    entries = load_log(str(log))
    graph = build_graph(
        entries, builtin_statements(), PairStrategy("seq"), template=True
    )
    doc = json.loads(json.dumps(graph_document(graph)))
    graph2 = load_graph_document(doc)
    res1 = greedy_synthesize(graph)
    res2 = greedy_synthesize(graph2)
    assert spec_document(res1, graph) == spec_document(res2, graph2)


# --------------------------------------------------------------------------
# widget application against hand-built documents


def collection_spec():
    return {
        "meta": {"gamma": 1.0, "alphas": [1.0, 1.0], "c0": 1.0},
        "interfaces": [
            {
                "id": "i0",
                "initial_query": "SELECT a, b, c, d FROM t",
                "closure": [],
                "widgets": [
                    {
                        "id": "w0",
                        "type_id": "multi_select",
                        "path": "0",
                        "mode": "collection",
                        "template": None,
                        "domain": [["a"], ["b"], ["c"], ["d"]],
                        "cost": 0.6,
                    }
                ],
            }
        ],
    }


def test_collection_state_rewrites_projection_list():
    spec = collection_spec()
    sql, ast = apply_widgets(spec, "i0", {"w0": ["b", "d"]})
    assert ast == parse_canonical("SELECT b, d FROM t")
    assert sql == unparse(parse_canonical("SELECT b, d FROM t"))


def test_collection_preserves_selection_order():
    spec = collection_spec()
    sql, _ = apply_widgets(spec, "i0", {"w0": ["d", "b"]})
    assert sql == "SELECT d, b FROM t"


def test_collection_member_outside_domain_rejected():
    spec = collection_spec()
    with pytest.raises(DomainViolation) as exc:
        apply_widgets(spec, "i0", {"w0": ["b", "z"]})
    assert exc.value.widget_id == "w0"
    assert exc.value.value == "z"


def test_collection_value_must_be_a_sequence():
    spec = collection_spec()
    with pytest.raises(DomainViolation):
        apply_widgets(spec, "i0", {"w0": "b"})


def test_scalar_value_outside_domain_rejected(two_query_spec):
    iface = two_query_spec["interfaces"][0]
    wid = iface["widgets"][0]["id"]
    with pytest.raises(DomainViolation) as exc:
        apply_widgets(two_query_spec, iface["id"], {wid: ["profit"]})
    assert exc.value.widget_id == wid


def test_unknown_interface_and_widget_rejected(two_query_spec):
    with pytest.raises(ConfigError):
        apply_widgets(two_query_spec, "i99", {})
    with pytest.raises(ConfigError):
        apply_widgets(two_query_spec, "i0", {"w99": ["costs"]})


def test_deletion_before_deeper_widget_reports_lost_path():
    spec = {
        "meta": {},
        "interfaces": [
            {
                "id": "i0",
                "initial_query": FIG_SQL_1,
                "closure": [],
                "widgets": [
                    {
                        "id": "wdrop",
                        "type_id": "button",
                        "path": "2/0",
                        "mode": "delete",
                        "template": None,
                        "domain": [[]],
                        "cost": 0.1,
                    },
                    {
                        "id": "wlit",
                        "type_id": "textbox",
                        "path": "2/0/0/1",
                        "mode": "replace",
                        "template": {
                            "type": "StrExpr",
                            "attrs": {"value": {"$": 0}},
                            "children": [],
                        },
                        "domain": [["USA"]],
                        "cost": 1.1,
                    },
                ],
            }
        ],
    }
    # deeper widget alone is fine
    sql, _ = apply_widgets(spec, "i0", {"wlit": ["EUR"]})
    assert sql == "SELECT date AS x, sales AS y FROM sales WHERE cty = 'EUR'"
    # the shallow deletion applies first and destroys the literal's path;
    # that is reported, not silently skipped
    with pytest.raises(PathNotFound) as exc:
        apply_widgets(spec, "i0", {"wdrop": True, "wlit": ["EUR"]})
    # the reported path points into the removed filter group, and the
    # longest surviving prefix stops at the (now empty) filter list
    assert tuple(exc.value.path)[:2] == (2, 0)
    assert tuple(exc.value.longest_prefix) == (2,)


def test_free_text_widget_coerces_numeric_strings():
    spec = {
        "meta": {},
        "interfaces": [
            {
                "id": "i0",
                "initial_query": "SELECT a FROM t WHERE b = 10",
                "closure": [],
                "widgets": [
                    {
                        "id": "w0",
                        "type_id": "textbox",
                        "path": "2/0/0/1",
                        "mode": "replace",
                        "template": {
                            "type": "IntExpr",
                            "attrs": {"value": {"$": 0}},
                            "children": [],
                        },
                        "domain": [[10]],
                        "cost": 1.1,
                    }
                ],
            }
        ],
    }
    sql, _ = apply_widgets(spec, "i0", {"w0": ["42"]})
    assert sql == "SELECT a FROM t WHERE b = 42"
    # free-form input is not limited to the mined options
    sql, _ = apply_widgets(spec, "i0", {"w0": [7]})
    assert sql == "SELECT a FROM t WHERE b = 7"


# --------------------------------------------------------------------------
# emitted documents audit themselves


def test_sampled_states_all_parse(two_query_spec):
    assert validate_spec(two_query_spec) > 0


def test_trace_replays_every_covered_query(tmp_path):
    log = olap_log_file(tmp_path / "log.jsonl", seed=11, steps=60)
    out = tmp_path / "spec.json"
    run_pipeline(log, pairs="seq", opt="template", out=out)
    spec = load_spec(out)
    trace = load_spec(trace_path(out))
    entries = load_log(str(log))
    targets = {e.pid: e.ast for e in entries if e.ast is not None}
    covered = sum(len(i["closure"]) for i in spec["interfaces"])
    assert verify_trace(spec, trace, targets) == covered


def test_tampered_trace_is_caught(tmp_path):
    d = tmp_path
    log = write_jsonl(d / "log.jsonl", [FIG_SQL_1, FIG_SQL_2], ["f1", "f2"])
    pil = d / "stmts.pil"
    pil.write_text(PAIRED_STMTS)
    out = d / "spec.json"
    run_pipeline(log, pil, pairs="all", opt="none", out=out)
    spec = load_spec(out)
    trace = load_spec(trace_path(out))
    targets = {"f1": parse_canonical(FIG_SQL_1), "f2": parse_canonical(FIG_SQL_2)}
    assert verify_trace(spec, trace, targets) == 2

    hop = trace["interfaces"]["i0"]["hops"]["f2"]
    victim = next(s for s in hop["steps"] if s["value"] == ["EUR"])
    victim["value"] = ["USA"]  # still in-domain, no longer reaches f2
    with pytest.raises(ConfigError):
        verify_trace(spec, trace, targets)


def test_trace_sits_next_to_its_spec(tmp_path):
    assert trace_path(tmp_path / "spec.json") == tmp_path / "spec.trace.json"
    assert trace_path(tmp_path / "out.dat") == tmp_path / "out.dat.trace.json"


def test_tab_order_lists_largest_interfaces_first(tmp_path):
    log = olap_log_file(tmp_path / "log.jsonl", seed=3, steps=50)
    spec = run_pipeline(log, pairs="seq", opt="template")
    sizes = {i["id"]: len(i["closure"]) for i in spec["interfaces"]}
    order = spec["meta"]["tab_order"]
    assert sorted(order) == sorted(sizes)
    assert [sizes[i] for i in order] == sorted(sizes.values(), reverse=True)


def test_trace_document_matches_written_file(tmp_path):
    log = olap_log_file(tmp_path / "log.jsonl", seed=13, steps=25)
    entries = load_log(str(log))
    graph = build_graph(
        entries, builtin_statements(), PairStrategy("seq"), template=True
    )
    result = greedy_synthesize(graph)
    out = tmp_path / "spec.json"
    run_pipeline(log, pairs="seq", opt="template", out=out)
    assert load_spec(trace_path(out)) == json.loads(
        json.dumps(trace_document(result))
    )
