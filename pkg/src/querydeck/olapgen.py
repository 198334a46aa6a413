"""Synthetic OLAP exploration logs for tests and benchmarks.

Generates a random walk over group-by-aggregate queries: a seed query with
uniformly sampled clause counts, then one random edit per step drawn from the
classic action set (add/remove/change a dimension; add/remove/change the
column or aggregate of a measure; add/remove a filter or change its column or
value).  The walk is deterministic under the seed and every emitted query
parses.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import ConfigError
from .mining import QueryEntry
from .sqlast import parse_canonical

__all__ = ["ACTIONS", "OlapGenConfig", "generate_olap_log"]

#: every edit the walk can apply; edit_weights may only name these
ACTIONS: tuple[str, ...] = (
    "add-dimension",
    "remove-dimension",
    "change-dimension",
    "add-measure",
    "remove-measure",
    "change-measure-column",
    "change-measure-aggregate",
    "add-filter",
    "remove-filter",
    "change-filter-column",
    "change-filter-value",
)


@dataclass(frozen=True)
class OlapGenConfig:
    """Knobs for the walk; empty pools are rejected at generation time."""

    seed: int = 0
    steps: int = 10
    dimensions: tuple[str, ...] = ("origin", "dest", "carrier", "year")
    measures: tuple[str, ...] = ("delay", "distance", "price")
    filter_columns: tuple[str, ...] = ("month", "day", "hour")
    aggregates: tuple[str, ...] = ("sum", "avg", "min", "max", "count")
    table: str = "ontime"
    #: inclusive bounds for filter literals
    value_range: tuple[int, int] = (1, 50)
    #: action name -> relative weight; unnamed actions get weight 0 when the
    #: mapping is non-empty, otherwise all actions are uniform
    edit_weights: dict[str, float] = field(default_factory=dict)


class _Walk:
    def __init__(self, cfg: OlapGenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.dims = list(rng.sample(cfg.dimensions, rng.randint(1, min(3, len(cfg.dimensions)))))
        self.measures = [
            (rng.choice(cfg.aggregates), col)
            for col in rng.sample(cfg.measures, rng.randint(1, min(2, len(cfg.measures))))
        ]
        count = rng.randint(0, min(2, len(cfg.filter_columns)))
        self.filters = [(col, self.value()) for col in rng.sample(cfg.filter_columns, count)]

    def value(self) -> int:
        return self.rng.randint(*self.cfg.value_range)

    def sql(self) -> str:
        parts = list(self.dims) + [f"{agg}({col})" for agg, col in self.measures]
        text = f"SELECT {', '.join(parts)} FROM {self.cfg.table}"
        if self.filters:
            text += " WHERE " + " AND ".join(f"{col} = {value}" for col, value in self.filters)
        text += " GROUP BY " + ", ".join(self.dims)
        return text

    # -- feasibility + application of each action --------------------------

    def _unused_dims(self) -> list[str]:
        return [d for d in self.cfg.dimensions if d not in self.dims]

    def _unused_filter_columns(self) -> list[str]:
        held = {col for col, _ in self.filters}
        return [c for c in self.cfg.filter_columns if c not in held]

    def feasible(self, action: str) -> bool:
        if action == "add-dimension":
            return bool(self._unused_dims())
        if action == "remove-dimension":
            return len(self.dims) >= 2
        if action == "change-dimension":
            return bool(self._unused_dims())
        if action == "add-measure":
            return any(
                (agg, col) not in self.measures
                for agg in self.cfg.aggregates
                for col in self.cfg.measures
            )
        if action == "remove-measure":
            return len(self.measures) >= 2
        if action == "change-measure-column":
            return any(
                (agg, col) not in self.measures
                for agg, _ in self.measures
                for col in self.cfg.measures
            )
        if action == "change-measure-aggregate":
            return any(
                (agg, col) not in self.measures
                for _, col in self.measures
                for agg in self.cfg.aggregates
            )
        if action == "add-filter":
            return bool(self._unused_filter_columns())
        if action == "remove-filter":
            return bool(self.filters)
        if action == "change-filter-value":
            lo, hi = self.cfg.value_range
            return bool(self.filters) and lo < hi
        if action == "change-filter-column":
            return bool(self.filters) and bool(self._unused_filter_columns())
        raise ConfigError(f"unknown edit action {action!r}")

    def apply(self, action: str) -> None:
        rng = self.rng
        if action == "add-dimension":
            name = rng.choice(self._unused_dims())
            self.dims.append(name)
        elif action == "remove-dimension":
            self.dims.pop(rng.randrange(len(self.dims)))
        elif action == "change-dimension":
            self.dims[rng.randrange(len(self.dims))] = rng.choice(self._unused_dims())
        elif action == "add-measure":
            options = [
                (agg, col)
                for agg in self.cfg.aggregates
                for col in self.cfg.measures
                if (agg, col) not in self.measures
            ]
            self.measures.append(rng.choice(options))
        elif action == "remove-measure":
            self.measures.pop(rng.randrange(len(self.measures)))
        elif action == "change-measure-column":
            options = [
                (i, col)
                for i, (agg, _) in enumerate(self.measures)
                for col in self.cfg.measures
                if (agg, col) not in self.measures
            ]
            i, col = rng.choice(options)
            self.measures[i] = (self.measures[i][0], col)
        elif action == "change-measure-aggregate":
            options = [
                (i, agg)
                for i, (_, col) in enumerate(self.measures)
                for agg in self.cfg.aggregates
                if (agg, col) not in self.measures
            ]
            i, agg = rng.choice(options)
            self.measures[i] = (agg, self.measures[i][1])
        elif action == "add-filter":
            self.filters.append((rng.choice(self._unused_filter_columns()), self.value()))
        elif action == "remove-filter":
            self.filters.pop(rng.randrange(len(self.filters)))
        elif action == "change-filter-column":
            i = rng.randrange(len(self.filters))
            self.filters[i] = (rng.choice(self._unused_filter_columns()), self.filters[i][1])
        elif action == "change-filter-value":
            i = rng.randrange(len(self.filters))
            col, old = self.filters[i]
            value = old
            while value == old:
                value = self.value()
            self.filters[i] = (col, value)


def generate_olap_log(cfg: OlapGenConfig) -> list[QueryEntry]:
    """Run the walk and return one parsed entry per step."""
    for pool_name in ("dimensions", "measures", "filter_columns", "aggregates"):
        if not getattr(cfg, pool_name):
            raise ConfigError(f"empty {pool_name} pool")
    if cfg.steps < 1:
        raise ConfigError("steps must be at least 1")
    if cfg.value_range[0] > cfg.value_range[1]:
        raise ConfigError("value_range bounds are reversed")
    for name in cfg.edit_weights:
        if name not in ACTIONS:
            raise ConfigError(f"unknown edit action {name!r} in edit_weights")
    if cfg.edit_weights and all(w <= 0 for w in cfg.edit_weights.values()):
        raise ConfigError("edit_weights must give some action positive weight")

    rng = random.Random(cfg.seed)
    walk = _Walk(cfg, rng)
    entries: list[QueryEntry] = []

    def emit() -> None:
        text = walk.sql()
        pid = f"q{len(entries):04d}"
        entries.append(QueryEntry(pid, text, parse_canonical(text)))

    emit()
    for _ in range(cfg.steps - 1):
        weights = {
            action: (cfg.edit_weights.get(action, 0.0) if cfg.edit_weights else 1.0)
            for action in ACTIONS
        }
        options = [a for a in ACTIONS if weights[a] > 0 and walk.feasible(a)]
        if not options:
            raise ConfigError("no weighted edit action is feasible from the current query")
        action = rng.choices(options, [weights[a] for a in options])[0]
        walk.apply(action)
        emit()
    return entries
