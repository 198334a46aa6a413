"""Command-line entry points for the log-to-interface toolchain.

Exit codes: 0 on success, 2 when the requested coverage threshold is not
reachable (the best spec is still written), 1 for every other error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path as FsPath

import click

from .diff import align
from .errors import ConfigError, CoverageUnreachable, QueryDeckError
from .mining import PairStrategy, build_graph, builtin_statements, load_log
from .olapgen import OlapGenConfig, generate_olap_log
from .pilang import parse_statements, suggest_statements
from .pipeline import (
    OPT_MODES,
    graph_document,
    load_graph_document,
    load_spec,
    run_pipeline,
    spec_document,
    trace_document,
    trace_path,
    validate_spec,
    verify_trace,
    write_json,
)
from .sqlast import parse_canonical
from .widgets import DEFAULT_TYPES, greedy_synthesize

_EXISTING_FILE = click.Path(exists=True, dir_okay=False)


def _parse_alphas(text: str) -> tuple[float, float]:
    """``visual=<w>,effort=<w>`` (either may be omitted; defaults are 1)."""
    weights = {"visual": 1.0, "effort": 1.0}
    if text.strip():
        for part in text.split(","):
            key, _, raw = part.partition("=")
            key = key.strip()
            if key not in weights:
                raise ConfigError(
                    f"unknown cost family {key!r}; expected visual=<w>,effort=<w>"
                )
            try:
                weights[key] = float(raw)
            except ValueError:
                raise ConfigError(f"bad weight {part.strip()!r}") from None
    return (weights["visual"], weights["effort"])


def _load_statements(pilang: str | None):
    if pilang is None:
        return builtin_statements()
    return parse_statements(FsPath(pilang).read_text(encoding="utf-8"))


@click.group()
def cli() -> None:
    """Mine SQL query logs into task-specific interactive interfaces."""


@cli.command()
@click.argument("file_a", type=_EXISTING_FILE)
@click.argument("file_b", type=_EXISTING_FILE)
def diff(file_a: str, file_b: str) -> None:
    """Print the structural diff between two query files as JSON."""
    tree_a = parse_canonical(FsPath(file_a).read_text(encoding="utf-8"))
    tree_b = parse_canonical(FsPath(file_b).read_text(encoding="utf-8"))
    table = align(tree_a, tree_b, FsPath(file_a).stem, FsPath(file_b).stem)
    click.echo(json.dumps(table.to_dicts(), indent=2))


@cli.command()
@click.option("--log", "log_path", required=True, type=_EXISTING_FILE)
@click.option("--sample", default=20, show_default=True, help="queries to sample")
@click.option("--max-diffs", default=10, show_default=True,
              help="ignore pairs with larger diffs")
@click.option("--seed", default=0, show_default=True)
def suggest(log_path: str, sample: int, max_diffs: int, seed: int) -> None:
    """Propose interaction statements from a sample of the log."""
    entries = load_log(log_path)
    queries = [(e.pid, e.ast) for e in entries if e.ast is not None]
    ranked = suggest_statements(
        queries, sample_size=sample, max_diffs=max_diffs, seed=seed
    )
    for statement, count in ranked:
        click.echo(f"-- seen in {count} pair(s)")
        click.echo(statement.source.strip())
        click.echo("")


@cli.command()
@click.option("--log", "log_path", required=True, type=_EXISTING_FILE)
@click.option("--pilang", default=None, type=_EXISTING_FILE,
              help="statement file (default: built-ins)")
@click.option("--pairs", type=click.Choice(["all", "seq"]), default="all",
              show_default=True)
@click.option("--opt", type=click.Choice(OPT_MODES), default="none",
              show_default=True)
@click.option("--stats", "stats_path", default=None,
              help="write build statistics as JSON")
@click.option("--out", "out_path", default=None,
              help="write the mined graph as JSON")
def mine(log_path: str, pilang: str | None, pairs: str, opt: str,
         stats_path: str | None, out_path: str | None) -> None:
    """Mine the interaction graph from a query log."""
    graph = build_graph(
        load_log(log_path),
        _load_statements(pilang),
        PairStrategy(pairs),
        clique=opt in ("clique", "both"),
        template=opt in ("template", "both"),
    )
    if stats_path:
        write_json(graph.stats, stats_path)
    if out_path:
        write_json(graph_document(graph), out_path)
    click.echo(
        f"{len(graph.nodes)} nodes, {len(graph.edges)} edges, "
        f"{len(graph.cliques)} clique(s); "
        f"{graph.stats['align_calls']} alignment(s), "
        f"{graph.stats['eval_calls']} evaluation(s)"
    )


@cli.command()
@click.option("--graph", "graph_path", required=True, type=_EXISTING_FILE)
@click.option("--gamma", default=1.0, show_default=True,
              help="required coverage fraction")
@click.option("--alpha", "alpha_spec", default="visual=1,effort=1",
              show_default=True, help="cost family weights")
@click.option("--c0", default=1.0, show_default=True,
              help="per-interface base cost")
@click.option("--out", "out_path", required=True)
def synthesize(graph_path: str, gamma: float, alpha_spec: str, c0: float,
               out_path: str) -> None:
    """Greedily synthesize interfaces from a mined graph."""
    graph = load_graph_document(json.loads(
        FsPath(graph_path).read_text(encoding="utf-8")))
    alphas = _parse_alphas(alpha_spec)
    result = greedy_synthesize(
        graph, types=DEFAULT_TYPES, alphas=alphas, gamma=gamma, c0=c0
    )
    spec = spec_document(result, graph)
    trace = trace_document(result)
    validate_spec(spec)
    verify_trace(spec, trace, {pid: graph.ast(pid) for pid in graph.nodes})
    write_json(spec, out_path)
    write_json(trace, trace_path(out_path))
    click.echo(
        f"wrote {out_path}: {len(spec['interfaces'])} interface(s), "
        f"coverage {result.coverage:.3f}, cost {result.cost:.3f}"
    )
    if not result.coverage_met:
        raise CoverageUnreachable(gamma, result.coverage)


@cli.command()
@click.option("--log", "log_path", required=True, type=_EXISTING_FILE)
@click.option("--pilang", default=None, type=_EXISTING_FILE,
              help="statement file (default: built-ins)")
@click.option("--gamma", default=1.0, show_default=True)
@click.option("--alpha", "alpha_spec", default="visual=1,effort=1",
              show_default=True)
@click.option("--c0", default=1.0, show_default=True)
@click.option("--pairs", type=click.Choice(["all", "seq"]), default="all",
              show_default=True)
@click.option("--opt", type=click.Choice(OPT_MODES), default="template",
              show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True)
def run(log_path: str, pilang: str | None, gamma: float, alpha_spec: str,
        c0: float, pairs: str, opt: str, seed: int, out_path: str) -> None:
    """Mine, synthesize and emit an interface spec in one shot."""
    spec = run_pipeline(
        log_path,
        pilang,
        out=out_path,
        gamma=gamma,
        alphas=_parse_alphas(alpha_spec),
        c0=c0,
        pairs=pairs,
        opt=opt,
        seed=seed,
    )
    click.echo(
        f"wrote {out_path} and {trace_path(out_path)}: "
        f"{len(spec['interfaces'])} interface(s), "
        f"coverage {spec['meta']['coverage']:.3f}"
    )


@cli.command()
@click.option("--seed", default=0, show_default=True)
@click.option("--steps", default=100, show_default=True,
              help="number of exploration steps")
@click.option("--out", "out_path", required=True)
def generate(seed: int, steps: int, out_path: str) -> None:
    """Generate a synthetic exploration log for demos and benchmarks."""
    entries = generate_olap_log(OlapGenConfig(seed=seed, steps=steps))
    with open(out_path, "w", encoding="utf-8") as handle:
        for entry in entries:
            handle.write(json.dumps({"pid": entry.pid, "query": entry.source}) + "\n")
    click.echo(f"wrote {len(entries)} queries to {out_path}")


@cli.command()
@click.option("--spec", "spec_path", required=True, type=_EXISTING_FILE)
@click.option("--db", "db_path", required=True, type=_EXISTING_FILE,
              help="CSV data file")
@click.option("--table", required=True, help="table name for the loaded data")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--static", "static_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="directory with UI assets (default: bundled, if present)")
def serve(spec_path: str, db_path: str, table: str, host: str, port: int,
          static_dir: str | None) -> None:
    """Serve a spec over HTTP against a CSV-backed table."""
    import uvicorn

    from .service import CsvBackend, create_app

    spec = load_spec(spec_path)
    backend = CsvBackend(db_path, table)
    if static_dir is None:
        bundled = FsPath(__file__).parent / "ui"
        static_dir = str(bundled) if bundled.is_dir() else None
    app = create_app(spec, backend, static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except CoverageUnreachable as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except QueryDeckError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
