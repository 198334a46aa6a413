import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from querydeck.errors import (
    IllegalDeletion,
    MalformedTree,
    PathNotFound,
    SqlSyntaxError,
    TypeClash,
    UnsupportedConstruct,
)
from querydeck.sqlast import (
    Node,
    canonicalize,
    node,
    parse,
    parse_canonical,
    parse_fragment,
    parse_path,
    format_path,
    substitute,
    subtree_at,
    unparse,
    unparse_fragment,
    validate_tree,
)

from helpers import (
    FIG_SQL_1,
    FIG_SQL_2,
    bi,
    col,
    f,
    fig_pair,
    group,
    i,
    okey,
    pc,
    random_query,
    s,
    select,
    table,
)


# ---------------------------------------------------------------------------
# parsing into the canonical shape
# ---------------------------------------------------------------------------

def test_minimal_query_has_all_clause_slots():
    tree = parse_canonical("SELECT a FROM T")
    assert tree == select([pc(col("a"))], [table("T")])
    # absent clauses stay addressable at fixed indices
    assert [c.node_type for c in tree.children] == [
        "Project", "From", "Where", "GroupBy", "OrderBy", "Limit",
    ]
    assert all(len(tree.children[k].children) == 0 for k in (2, 3, 4, 5))


def test_fig_pair_parses_to_frozen_trees():
    q1, q2 = fig_pair()
    assert parse_canonical(FIG_SQL_1) == q1
    assert parse_canonical(FIG_SQL_2) == q2


def test_known_paths_in_fig_tree():
    q1, _ = fig_pair()
    assert subtree_at(q1, (0, 1, 0)) == col("sales")
    assert subtree_at(q1, (2, 0, 0, 1)) == s("USA")
    assert subtree_at(q1, ()) is q1


def test_full_clause_query():
    sql = ("SELECT origin, avg(delay) AS d FROM ontime WHERE price > 100 "
           "GROUP BY origin ORDER BY origin DESC LIMIT 10")
    tree = parse_canonical(sql)
    expected = select(
        [pc(col("origin")), pc(node("FuncExpr", {"name": "avg"}, (col("delay"),)), "d")],
        [table("ontime")],
        where=[group(bi(">", col("price"), i(100)))],
        group_by=[col("origin")],
        order_by=[okey(col("origin"), "desc")],
        limit=10,
    )
    assert tree == expected


def test_keywords_and_comments_are_case_insensitive_and_discarded():
    tree = parse_canonical("select a from T -- trailing note\n")
    assert tree == select([pc(col("a"))], [table("T")])
    tree2 = parse_canonical("SELECT a -- mid comment\nFROM T WHERE a = 1")
    assert tree2.children[2].children != ()


def test_literal_projections_parse():
    tree = parse_canonical("SELECT 1, 2, 3 FROM T")
    assert tree.children[0].children == (pc(i(1)), pc(i(2)), pc(i(3)))


def test_string_escape_roundtrip():
    tree = parse_canonical("SELECT a FROM T WHERE city = 'O''Hare'")
    assert subtree_at(tree, (2, 0, 0, 1)) == s("O'Hare")
    assert unparse(tree) == "SELECT a FROM T WHERE city = 'O''Hare'"


def test_syntax_error_carries_position():
    with pytest.raises(SqlSyntaxError) as err:
        parse("SELECT a FROM")
    assert err.value.line == 1
    assert err.value.column >= 1
    with pytest.raises(SqlSyntaxError):
        parse("")
    with pytest.raises(SqlSyntaxError):
        parse("SELECT a FROM T WHERE")
    with pytest.raises(SqlSyntaxError):
        parse("SELECT a FROM T extra")


def test_unsupported_constructs_are_rejected():
    with pytest.raises(UnsupportedConstruct):
        parse("SELECT * FROM T")
    with pytest.raises(UnsupportedConstruct):
        parse("SELECT count(avg(a)) FROM T")


# ---------------------------------------------------------------------------
# CNF canonicalization
# ---------------------------------------------------------------------------

def _where_groups(tree: Node) -> list[list[Node]]:
    return [list(g.children) for g in tree.children[2].children]


def test_cnf_conjunction_of_disjunction():
    tree = parse_canonical("SELECT a FROM T WHERE a > 1 AND (b < 2 OR c = 3)")
    assert _where_groups(tree) == [
        [bi(">", col("a"), i(1))],
        [bi("<", col("b"), i(2)), bi("=", col("c"), i(3))],
    ]


def test_cnf_distributes_or_over_and():
    tree = parse_canonical("SELECT a FROM T WHERE (a > 1 AND b < 2) OR c = 3")
    assert _where_groups(tree) == [
        [bi(">", col("a"), i(1)), bi("=", col("c"), i(3))],
        [bi("<", col("b"), i(2)), bi("=", col("c"), i(3))],
    ]


def test_between_desugars_to_two_conjuncts():
    tree = parse_canonical("SELECT a FROM T WHERE x BETWEEN 1 AND 5")
    assert _where_groups(tree) == [
        [bi(">=", col("x"), i(1))],
        [bi("<=", col("x"), i(5))],
    ]


def test_not_pushdown_flips_operators():
    tree = parse_canonical("SELECT a FROM T WHERE NOT (a = 1 AND b < 2)")
    assert _where_groups(tree) == [
        [bi("!=", col("a"), i(1)), bi(">=", col("b"), i(2))],
    ]
    tree2 = parse_canonical("SELECT a FROM T WHERE NOT NOT a = 1")
    assert _where_groups(tree2) == [[bi("=", col("a"), i(1))]]
    tree3 = parse_canonical("SELECT a FROM T WHERE NOT x BETWEEN 1 AND 5")
    assert _where_groups(tree3) == [
        [bi("<", col("x"), i(1)), bi(">", col("x"), i(5))],
    ]


def test_canonicalize_is_idempotent():
    rng = random.Random(7)
    for _ in range(50):
        tree = random_query(rng)
        assert canonicalize(tree) == tree


# ---------------------------------------------------------------------------
# unparse: determinism and round trip
# ---------------------------------------------------------------------------

def test_unparse_fixed_forms():
    q1, _ = fig_pair()
    assert unparse(q1) == "SELECT date AS x, sales AS y FROM sales WHERE cty = 'USA'"
    tree = parse_canonical("select a from T where a=1 or b=2 order by a")
    assert unparse(tree) == "SELECT a FROM T WHERE (a = 1 OR b = 2) ORDER BY a ASC"


def test_unparse_fragments():
    assert unparse_fragment(col("sales")) == "sales"
    assert unparse_fragment(s("USA")) == "'USA'"
    assert unparse_fragment(i(-3)) == "-3"
    assert unparse_fragment(f(2.5)) == "2.5"
    assert unparse_fragment(bi("<=", col("a"), i(4))) == "a <= 4"
    assert unparse_fragment(group(bi("=", col("a"), i(1)), bi("=", col("b"), i(2)))) \
        == "(a = 1 OR b = 2)"
    assert unparse_fragment(pc(col("x"), "y")) == "x AS y"


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_roundtrip_random_canonical_queries(seed):
    tree = random_query(random.Random(seed))
    assert parse_canonical(unparse(tree)) == tree


def test_unparse_rejects_malformed_trees():
    bad = node("StrExpr", {"value": "x"}, (col("a"),))  # literal with a child
    with pytest.raises(MalformedTree):
        validate_tree(bad)
    query = select([pc(col("a"))], [table("T")])
    hacked = Node("Select", (), query.children[:2] + (bad,) + query.children[3:])
    with pytest.raises(MalformedTree):
        unparse(hacked)
    listless = node("Where", {"oops": 1})
    with pytest.raises(MalformedTree):
        validate_tree(listless)


# ---------------------------------------------------------------------------
# paths and edits
# ---------------------------------------------------------------------------

def test_path_parsing_and_formatting():
    assert parse_path("0/1/0") == (0, 1, 0)
    assert parse_path("") == ()
    assert format_path((2, 0, 0, 1)) == "2/0/0/1"
    assert format_path(()) == ""


def test_path_not_found_reports_longest_prefix():
    q1, _ = fig_pair()
    with pytest.raises(PathNotFound) as err:
        subtree_at(q1, (2, 0, 0, 9))
    assert err.value.longest_prefix == (2, 0, 0)
    assert err.value.path == (2, 0, 0, 9)


def test_substitute_replaces_without_mutating():
    q1, _ = fig_pair()
    edited = substitute(q1, (0, 1, 0), col("costs"))
    assert subtree_at(edited, (0, 1, 0)) == col("costs")
    assert subtree_at(q1, (0, 1, 0)) == col("sales")  # original untouched
    assert edited.children[1] is q1.children[1]  # unchanged subtrees shared


def test_substitute_insert_and_delete_in_lists():
    q1, _ = fig_pair()
    extra = group(bi(">", col("price"), i(10)))
    grown = substitute(q1, (2, 1), extra, insert=True)
    assert [g for g in grown.children[2].children] == [q1.children[2].children[0], extra]
    shrunk = substitute(grown, (2, 0), None)
    assert shrunk.children[2].children == (extra,)
    # inject in the middle shifts later elements
    mid = substitute(grown, (2, 1), group(bi("=", col("z"), i(0))), insert=True)
    assert len(mid.children[2].children) == 3
    assert mid.children[2].children[2] == extra


def test_substitute_errors():
    q1, _ = fig_pair()
    with pytest.raises(IllegalDeletion):
        substitute(q1, (0, 1, 0), None)  # ProjClause is not a list parent
    with pytest.raises(IllegalDeletion):
        substitute(q1, (0, 0, 0), col("x"), insert=True)
    with pytest.raises(TypeClash):
        substitute(q1, (2, 0), col("x"))  # Where holds Or groups
    with pytest.raises(TypeClash):
        substitute(q1, (2, 1), col("x"), insert=True)
    with pytest.raises(PathNotFound):
        substitute(q1, (2, 5), group(bi("=", col("a"), i(1))), insert=True)
    with pytest.raises(IllegalDeletion):
        substitute(q1, (), None)


def test_validate_accepts_random_queries():
    rng = random.Random(21)
    for _ in range(30):
        validate_tree(random_query(rng))


_ELEMENT_SLOTS = [
    (0, "ProjClause"), (1, "TableRef"), (2, "Or"),
    (3, "ColExpr"), (4, "OrderKey"), (5, "IntExpr"),
]


def test_parse_fragment_inverts_unparse_fragment_for_list_elements():
    q = parse_canonical(
        "SELECT origin, sum(delay) AS d FROM ontime "
        "WHERE month = 5 AND (day = 1 OR day = 2) "
        "GROUP BY origin ORDER BY origin DESC LIMIT 10"
    )
    for slot, element_type in _ELEMENT_SLOTS:
        for child in q.children[slot].children:
            assert parse_fragment(unparse_fragment(child), element_type) == child


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_parse_fragment_round_trip_random(seed):
    q = random_query(random.Random(seed))
    for slot, element_type in _ELEMENT_SLOTS:
        for child in q.children[slot].children:
            assert parse_fragment(unparse_fragment(child), element_type) == child


def test_parse_fragment_rejects_bad_input():
    with pytest.raises(SqlSyntaxError, match="single conjunct"):
        parse_fragment("month = 5 AND day = 2", "Or")
    with pytest.raises(SqlSyntaxError, match="trailing"):
        parse_fragment("origin,", "ColExpr")
    with pytest.raises(SqlSyntaxError, match="empty"):
        parse_fragment("  ", "ColExpr")
    with pytest.raises(SqlSyntaxError, match="expected IntExpr"):
        parse_fragment("1.5", "IntExpr")
    with pytest.raises(UnsupportedConstruct):
        parse_fragment("x", "Where")
