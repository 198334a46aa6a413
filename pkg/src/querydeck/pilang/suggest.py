"""Propose new filter statements from a log's unexplained edits.

Takes a uniform sample of queries, aligns every pair in the sample, drops
pairs already explained by an existing statement (or with more records than
``max_diffs``), and groups the remaining records by the node-type path from
the root down to the edited subtree.  Each group yields one candidate
statement binding that typed path, ranked by how many records fell in the
group.
"""
from __future__ import annotations

import itertools
import random
from collections import Counter
from typing import Sequence

from ..diff import DiffRecord, align
from ..errors import EmptySample
from ..sqlast import Node, subtree_at
from .ast import Statement
from .engine import eval_statement
from .parser import parse_statement

__all__ = ["suggest_statements"]


def _typed_path(record: DiffRecord, ast1: Node) -> tuple[str, ...]:
    """Node types from the root down to the edited subtree."""
    types = [subtree_at(ast1, record.path[:d]).node_type for d in range(len(record.path))]
    tip = record.tau1 if record.tau1 is not None else record.tau2
    types.append(tip.node_type)
    return tuple(types)


def suggest_statements(
    queries: Sequence[tuple[str, Node]],
    existing: Sequence[Statement] = (),
    *,
    sample_size: int = 20,
    max_diffs: int = 10,
    seed: int = 0,
) -> list[tuple[Statement, int]]:
    """Candidate statements with their group frequencies, most common first.

    ``queries`` are (pid, canonical tree) pairs; ``sample_size`` queries are
    drawn without replacement and every pair in the sample is aligned.
    """
    if max_diffs < 1:
        raise ValueError("max_diffs must be at least 1")
    if sample_size < 2 or sample_size > len(queries):
        raise EmptySample(
            f"cannot sample {sample_size} queries from a log of {len(queries)}"
        )
    rng = random.Random(seed)
    pool = list(queries)
    if len(pool) > sample_size:
        pool = rng.sample(pool, sample_size)
    counts: Counter[tuple[str, ...]] = Counter()
    for (pid1, a), (pid2, b) in itertools.combinations(pool, 2):
        table = align(a, b, pid1, pid2)
        if not table.records or len(table.records) > max_diffs:
            continue
        if any(eval_statement(s, table, a, b) for s in existing):
            continue
        for record in table.records:
            counts[_typed_path(record, a)] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    out: list[tuple[Statement, int]] = []
    for n, (types, freq) in enumerate(ranked, start=1):
        path = "/" + "/".join(types)
        text = f"FROM {path} AS T WHERE T.τ1 != T.τ2 MATCH suggested-{n}(T)"
        out.append((parse_statement(text), freq))
    return out
