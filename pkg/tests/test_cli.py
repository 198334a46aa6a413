"""Command-line behavior: the whole toolchain driven the way a user drives it."""
from __future__ import annotations

import json
import subprocess

from querydeck.sqlast import parse_canonical

from helpers import FIG_SQL_1, FIG_SQL_2


def pi(*args, cwd=None):
    return subprocess.run(
        ["pi", *map(str, args)], capture_output=True, text=True, cwd=cwd
    )


def test_generate_writes_a_parseable_log(tmp_path):
    out = tmp_path / "log.jsonl"
    proc = pi("generate", "--seed", 3, "--steps", 12, "--out", out)
    assert proc.returncode == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 12
    for line in lines:
        entry = json.loads(line)
        parse_canonical(entry["query"])  # raises if not SQL
        assert entry["pid"]


def test_diff_prints_one_record_per_edit(tmp_path):
    (tmp_path / "a.sql").write_text(FIG_SQL_1)
    (tmp_path / "b.sql").write_text(FIG_SQL_2)
    proc = pi("diff", tmp_path / "a.sql", tmp_path / "b.sql")
    assert proc.returncode == 0
    records = json.loads(proc.stdout)
    assert [(r["path"], r["tau1"], r["tau2"]) for r in records] == [
        ("0/1/0", "sales", "costs"),
        ("2/0/0/1", "'USA'", "'EUR'"),
    ]
    assert all(r["pid1"] == "a" and r["pid2"] == "b" for r in records)


def test_suggest_prints_statement_sketches(tmp_path):
    log = tmp_path / "log.jsonl"
    assert pi("generate", "--seed", 4, "--steps", 30, "--out", log).returncode == 0
    proc = pi("suggest", "--log", log, "--sample", 10, "--max-diffs", 5)
    assert proc.returncode == 0
    assert "MATCH" in proc.stdout
    assert "seen in" in proc.stdout


def test_mine_then_synthesize_matches_run(tmp_path):
    log = tmp_path / "log.jsonl"
    assert pi("generate", "--seed", 5, "--steps", 40, "--out", log).returncode == 0

    graph = tmp_path / "graph.json"
    stats = tmp_path / "stats.json"
    mined = pi(
        "mine", "--log", log, "--pairs", "all", "--opt", "both",
        "--out", graph, "--stats", stats,
    )
    assert mined.returncode == 0
    assert "nodes" in mined.stdout and "alignment" in mined.stdout
    counted = json.loads(stats.read_text())
    assert counted["align_calls"] > 0
    assert counted["eval_calls"] > 0

    spec = tmp_path / "spec.json"
    assert pi("synthesize", "--graph", graph, "--out", spec).returncode == 0

    direct = tmp_path / "direct.json"
    assert (
        pi(
            "run", "--log", log, "--pairs", "all", "--opt", "both", "--out", direct
        ).returncode
        == 0
    )
    assert spec.read_bytes() == direct.read_bytes()


def test_unreachable_coverage_exits_two_but_writes_the_spec(tmp_path):
    log = tmp_path / "log.jsonl"
    log.write_text(
        json.dumps({"pid": "p0", "query": "SELECT a FROM t"})
        + "\n"
        + json.dumps({"pid": "p1", "query": "THIS IS NOT SQL ((("})
        + "\n"
    )
    out = tmp_path / "spec.json"
    proc = pi("run", "--log", log, "--gamma", "1.0", "--out", out)
    assert proc.returncode == 2
    assert "unreachable" in proc.stderr
    assert json.loads(out.read_text())["meta"]["coverage"] == 0.5


def test_missing_input_exits_one(tmp_path):
    proc = pi("run", "--log", tmp_path / "absent.jsonl")
    assert proc.returncode == 1


def test_malformed_weight_option_exits_one(tmp_path):
    log = tmp_path / "log.jsonl"
    log.write_text(json.dumps({"pid": "p0", "query": "SELECT a FROM t"}) + "\n")
    proc = pi("run", "--log", log, "--alpha", "visual=abc")
    assert proc.returncode == 1
    proc = pi("run", "--log", log, "--alpha", "shine=2")
    assert proc.returncode == 1


def test_serve_help_names_the_data_options():
    proc = pi("serve", "--help")
    assert proc.returncode == 0
    assert "--db" in proc.stdout
    assert "--table" in proc.stdout
