"""HTTP layer: serve a synthesized interface spec against a SQL backend.

The app exposes exactly three endpoints — a health probe, the spec itself,
and widget application — and treats all of its state (the spec, the loaded
data) as read-only after startup.  Query execution goes through a pluggable
``execute(sql) -> (columns, rows)`` backend; the reference backend loads a
CSV file into an in-memory relational engine at startup.
"""
from __future__ import annotations

import csv
import logging
import sqlite3
import threading
from pathlib import Path as FsPath
from typing import Mapping, Protocol

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import ConfigError, DomainViolation, QueryDeckError
from .pipeline import apply_widgets
from .sqlast import to_json

log = logging.getLogger(__name__)

__all__ = ["CsvBackend", "SqlBackend", "create_app"]


class SqlBackend(Protocol):
    """Anything that can run one SELECT and hand back a result table."""

    def execute(self, sql: str) -> tuple[list[str], list[list]]: ...


def _column_affinity(values: list[str]) -> str:
    """INTEGER / REAL / TEXT, judged from every non-empty cell."""
    non_empty = [v for v in values if v != ""]
    if not non_empty:
        return "TEXT"

    def all_parse(cast) -> bool:
        for v in non_empty:
            try:
                cast(v)
            except ValueError:
                return False
        return True

    if all_parse(int):
        return "INTEGER"
    if all_parse(float):
        return "REAL"
    return "TEXT"


class CsvBackend:
    """Reference backend: one CSV file as one table, loaded once.

    Column types are sniffed from the data (integer, then real, then text);
    empty cells in numeric columns become NULL.  The connection is flipped
    to query-only after loading, and calls are serialized with a lock so
    the app's thread pool can share the single connection.
    """

    def __init__(self, csv_path: str | FsPath, table: str) -> None:
        if not table or not table.replace("_", "").isalnum():
            raise ConfigError(f"invalid table name {table!r}")
        with open(csv_path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise ConfigError(f"empty data file {str(csv_path)!r}") from None
            rows = list(reader)
        if len(set(header)) != len(header):
            raise ConfigError("duplicate column names in data file")
        affinities = [
            _column_affinity([row[i] if i < len(row) else "" for row in rows])
            for i in range(len(header))
        ]

        def cell(raw: str, affinity: str):
            if affinity == "TEXT":
                return raw
            if raw == "":
                return None
            return int(raw) if affinity == "INTEGER" else float(raw)

        self._lock = threading.Lock()
        self._conn = sqlite3.connect(":memory:", check_same_thread=False)
        columns = ", ".join(
            f'"{name}" {affinity}' for name, affinity in zip(header, affinities)
        )
        self._conn.execute(f'CREATE TABLE "{table}" ({columns})')
        placeholders = ", ".join("?" for _ in header)
        self._conn.executemany(
            f'INSERT INTO "{table}" VALUES ({placeholders})',
            (
                tuple(
                    cell(row[i] if i < len(row) else "", affinities[i])
                    for i in range(len(header))
                )
                for row in rows
            ),
        )
        self._conn.commit()
        self._conn.execute("PRAGMA query_only = ON")

    def execute(self, sql: str) -> tuple[list[str], list[list]]:
        with self._lock:
            cursor = self._conn.execute(sql)
            columns = [d[0] for d in cursor.description or ()]
            return columns, [list(row) for row in cursor.fetchall()]


class ApplyRequest(BaseModel):
    state: dict[str, object]


def create_app(
    spec: Mapping, backend: SqlBackend, static_dir: str | FsPath | None = None
) -> FastAPI:
    """Build the app around one spec and one backend.

    Responses are JSON throughout; widget-domain violations come back as
    422 with the widget id and offending value, unknown interface or widget
    ids as 404, and anything unexpected as a sanitized 500.
    """
    app = FastAPI(title="querydeck", docs_url=None, redoc_url=None, openapi_url=None)

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/api/interfaces")
    def interfaces() -> Mapping:
        return spec

    @app.post("/api/interfaces/{interface_id}/apply")
    def apply(interface_id: str, request: ApplyRequest) -> dict:
        try:
            sql, ast = apply_widgets(spec, interface_id, request.state)
        except DomainViolation as exc:
            raise HTTPException(
                422,
                {
                    "error": "domain violation",
                    "widget_id": exc.widget_id,
                    "value": exc.value,
                },
            ) from None
        except ConfigError as exc:
            raise HTTPException(404, str(exc)) from None
        except QueryDeckError:
            log.exception("widget application failed for %r", interface_id)
            raise HTTPException(500, "internal error") from None
        try:
            columns, rows = backend.execute(sql)
        except Exception:
            log.exception("query execution failed")
            raise HTTPException(500, "query execution failed") from None
        return {"sql": sql, "ast": to_json(ast), "columns": columns, "rows": rows}

    if static_dir is not None and FsPath(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
