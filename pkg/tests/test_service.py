"""HTTP layer tests: spec served, states applied, data queried, errors typed."""
from __future__ import annotations

import csv
import json
import sqlite3
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

import querydeck
from querydeck.errors import ConfigError
from querydeck.pipeline import run_pipeline
from querydeck.service import CsvBackend, create_app
from querydeck.sqlast import parse_canonical, to_json

DATA = Path(querydeck.__file__).parent / "data" / "ontime.csv"


def read_fixture():
    with open(DATA, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


def make_spec():
    return {
        "meta": {"gamma": 1.0, "alphas": [1.0, 1.0], "c0": 1.0, "coverage": 1.0},
        "interfaces": [
            {
                "id": "i0",
                "initial_query": "SELECT origin, dest FROM ontime WHERE year = 2014",
                "closure": [],
                "widgets": [
                    {
                        "id": "w0",
                        "type_id": "dropdown",
                        "path": "2/0/0/1",
                        "mode": "replace",
                        "template": {
                            "type": "IntExpr",
                            "attrs": {"value": {"$": 0}},
                            "children": [],
                        },
                        "domain": [[2014], [2015], [2016]],
                        "cost": 0.55,
                    }
                ],
            }
        ],
    }


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(make_spec(), CsvBackend(DATA, "ontime")))


def test_health_probe(client):
    resp = client.get("/api/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_interfaces_endpoint_echoes_the_spec(client):
    resp = client.get("/api/interfaces")
    assert resp.status_code == 200
    assert resp.json() == make_spec()


def test_apply_runs_the_rewritten_query(client):
    resp = client.post("/api/interfaces/i0/apply", json={"state": {"w0": [2016]}})
    assert resp.status_code == 200
    body = resp.json()
    assert body["sql"] == "SELECT origin, dest FROM ontime WHERE year = 2016"
    assert body["ast"] == to_json(parse_canonical(body["sql"]))
    assert body["columns"] == ["origin", "dest"]
    expected = [
        [r["origin"], r["dest"]] for r in read_fixture() if r["year"] == "2016"
    ]
    assert body["rows"] == expected


def test_apply_with_empty_state_runs_the_initial_query(client):
    resp = client.post("/api/interfaces/i0/apply", json={"state": {}})
    assert resp.status_code == 200
    body = resp.json()
    assert body["sql"] == "SELECT origin, dest FROM ontime WHERE year = 2014"
    assert len(body["rows"]) == sum(1 for r in read_fixture() if r["year"] == "2014")


def test_out_of_domain_value_is_a_422_naming_the_widget(client):
    resp = client.post("/api/interfaces/i0/apply", json={"state": {"w0": [1999]}})
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert detail["error"] == "domain violation"
    assert detail["widget_id"] == "w0"
    assert detail["value"] == [1999]


def test_unknown_interface_is_a_404(client):
    resp = client.post("/api/interfaces/i9/apply", json={"state": {}})
    assert resp.status_code == 404


def test_unknown_widget_is_a_404(client):
    resp = client.post("/api/interfaces/i0/apply", json={"state": {"w9": [2016]}})
    assert resp.status_code == 404


def test_body_without_state_is_rejected(client):
    resp = client.post("/api/interfaces/i0/apply", json={"status": {}})
    assert resp.status_code == 422


def test_mined_spec_served_end_to_end(tmp_path):
    log = tmp_path / "log.jsonl"
    with open(log, "w") as fh:
        fh.write(json.dumps({"pid": "a", "query": "SELECT origin, sum(delay) FROM ontime GROUP BY origin"}) + "\n")
        fh.write(json.dumps({"pid": "b", "query": "SELECT origin, sum(price) FROM ontime GROUP BY origin"}) + "\n")
    spec = run_pipeline(log, pairs="all", opt="none")
    app = create_app(spec, CsvBackend(DATA, "ontime"))
    with TestClient(app) as http:
        iface = spec["interfaces"][0]
        widget = iface["widgets"][0]
        resp = http.post(
            f"/api/interfaces/{iface['id']}/apply",
            json={"state": {widget["id"]: ["price"]}},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["sql"] == "SELECT origin, sum(price) FROM ontime GROUP BY origin"
        want = {}
        for r in read_fixture():
            want[r["origin"]] = want.get(r["origin"], 0.0) + float(r["price"])
        got = {origin: total for origin, total in body["rows"]}
        assert set(got) == set(want)
        for origin in want:
            assert got[origin] == pytest.approx(want[origin])


def test_static_directory_is_served_when_present(tmp_path):
    (tmp_path / "index.html").write_text("<h1>console</h1>")
    app = create_app(make_spec(), CsvBackend(DATA, "ontime"), static_dir=tmp_path)
    with TestClient(app) as http:
        resp = http.get("/")
        assert resp.status_code == 200
        assert "console" in resp.text
        # API routes still win over the static mount
        assert http.get("/api/health").json() == {"status": "ok"}


# --------------------------------------------------------------------------
# the CSV-backed reference engine


def test_backend_sniffs_column_types():
    backend = CsvBackend(DATA, "ontime")
    columns, rows = backend.execute(
        "SELECT typeof(delay), typeof(price), typeof(origin) FROM ontime LIMIT 1"
    )
    assert rows[0] == ["integer", "real", "text"]


def test_backend_turns_empty_numeric_cells_into_nulls(tmp_path):
    data = tmp_path / "t.csv"
    data.write_text("name,score\nalice,3\nbob,\ncara,5\n")
    backend = CsvBackend(data, "t")
    _, rows = backend.execute("SELECT name, score FROM t ORDER BY name")
    assert rows == [["alice", 3], ["bob", None], ["cara", 5]]
    _, agg = backend.execute("SELECT count(score), count(*) FROM t")
    assert agg == [[2, 3]]


def test_backend_keeps_text_column_with_mixed_cells(tmp_path):
    data = tmp_path / "t.csv"
    data.write_text("code\n12\nx9\n")
    backend = CsvBackend(data, "t")
    _, rows = backend.execute("SELECT code FROM t")
    assert rows == [["12"], ["x9"]]


def test_backend_rejects_bad_table_names_and_headers(tmp_path):
    with pytest.raises(ConfigError):
        CsvBackend(DATA, "on time; DROP")
    dup = tmp_path / "dup.csv"
    dup.write_text("a,a\n1,2\n")
    with pytest.raises(ConfigError):
        CsvBackend(dup, "t")
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ConfigError):
        CsvBackend(empty, "t")


def test_backend_is_read_only_after_load():
    backend = CsvBackend(DATA, "ontime")
    with pytest.raises(sqlite3.OperationalError):
        backend.execute("DELETE FROM ontime")
    # and a failing query surfaces as a sanitized 500 through the app
    app = create_app(make_spec(), _Boom())
    with TestClient(app, raise_server_exceptions=False) as http:
        resp = http.post("/api/interfaces/i0/apply", json={"state": {}})
        assert resp.status_code == 500
        assert resp.json()["detail"] == "query execution failed"


class _Boom:
    def execute(self, sql):
        raise RuntimeError("backend exploded")
