"""Filter language over diff tables: parsing, evaluation, suggestion."""
from .ast import (
    Binding,
    BoolOp,
    Comparison,
    Literal,
    NavRef,
    NavStep,
    NotOp,
    NullTest,
    PathExpr,
    Predicate,
    Statement,
    Step,
)
from .engine import (
    LiftedRow,
    MatchRecord,
    MatchTable,
    depends_on_literals,
    eval_statement,
    evaluate_predicate,
    is_symmetric,
    is_transitive,
    lift,
    match_pathexpr,
    match_record,
)
from .parser import parse_statement, parse_statements
from .suggest import suggest_statements

__all__ = [
    "Binding",
    "BoolOp",
    "Comparison",
    "Literal",
    "NavRef",
    "NavStep",
    "NotOp",
    "NullTest",
    "PathExpr",
    "Predicate",
    "Statement",
    "Step",
    "LiftedRow",
    "MatchRecord",
    "MatchTable",
    "depends_on_literals",
    "eval_statement",
    "evaluate_predicate",
    "is_symmetric",
    "is_transitive",
    "lift",
    "match_pathexpr",
    "match_record",
    "parse_statement",
    "parse_statements",
    "suggest_statements",
]
