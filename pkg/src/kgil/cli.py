"""Command-line interface.

`kgil serve` runs the HTTP service; the other commands run the pipeline
in-process for batch and offline use. `kgil ask --server` goes through a
running service instead.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import store
from .evaluation import SystemSpec, export_report, run_eval, transcript_source
from .gateway import GatewayConfig
from .orchestrator import Engine, EngineConfig


def _engine(kg: str, corpus: str, mode: str, fixtures: str | None) -> Engine:
    gateway_config = GatewayConfig.from_env()
    gateway_config.mode = mode
    if fixtures:
        gateway_config.fixture_dir = fixtures
    elif not gateway_config.fixture_dir:
        gateway_config.fixture_dir = os.path.join(corpus, "llm_fixtures")
    config = EngineConfig(corpus_dir=corpus, kg_path=kg, gateway=gateway_config)
    return Engine(config)


@click.group()
def main():
    """Knowledge-graph grounded question answering."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--kg", default="data/kg.json", show_default=True)
@click.option("--corpus", default="fixtures/corpus", show_default=True)
@click.option("--mode", default=None, help="Gateway mode: live, record, or replay.")
@click.option("--fixtures", default=None, help="LLM fixture directory.")
def serve(host, port, kg, corpus, mode, fixtures):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    engine = _engine(kg, corpus, mode or os.environ.get("KGIL_LLM_MODE", "replay"), fixtures)
    uvicorn.run(create_app(engine), host=host, port=port, log_level="info")


@main.command()
@click.argument("text")
@click.option("--kg", default="data/kg.json", show_default=True)
@click.option("--corpus", default="fixtures/corpus", show_default=True)
@click.option("--mode", default="replay", show_default=True)
@click.option("--fixtures", default=None)
@click.option("--server", default=None, help="POST to a running service instead.")
@click.option("--json", "as_json", is_flag=True, help="Print the full session result.")
def ask(text, kg, corpus, mode, fixtures, server, as_json):
    """Answer one question."""
    if server:
        import httpx

        response = httpx.post(f"{server.rstrip('/')}/ask", json={"text": text}, timeout=120)
        response.raise_for_status()
        doc = response.json()
        if as_json:
            click.echo(json.dumps(doc, indent=2, ensure_ascii=False))
        else:
            click.echo(doc["answer"]["text"])
            for url in doc["answer"]["sources"]:
                click.echo(f"source: {url}")
        return
    engine = _engine(kg, corpus, mode, fixtures)
    result = engine.ask(text)
    if as_json:
        click.echo(json.dumps(result.to_dict(), indent=2, ensure_ascii=False))
    else:
        click.echo(result.answer.text)
        for url in result.answer.sources:
            click.echo(f"source: {url}")
        stats = result.kg_stats_after
        click.echo(
            f"kg: {stats.term_count} terms, {stats.triple_count} triples, "
            f"{stats.relation_type_count} relation types"
        )


@main.group()
def eval():
    """Evaluation harness commands."""


@eval.command("run")
@click.option("--corpus", default="fixtures/corpus", show_default=True)
@click.option("--systems", required=True, help="Comma-separated transcript system names.")
@click.option("--out", default="report.csv", show_default=True)
@click.option(
    "--format", "fmt", default="csv", show_default=True,
    type=click.Choice(["csv", "structured", "table-text"]),
)
@click.option("--truth-mode", default="deterministic", show_default=True,
              type=click.Choice(["deterministic", "judge"]))
def eval_run(corpus, systems, out, fmt, truth_mode):
    """Evaluate transcript systems over a corpus and write a report."""
    specs = []
    for name in [s.strip() for s in systems.split(",") if s.strip()]:
        directory = os.path.join(corpus, "transcripts", name)
        if not os.path.isdir(directory):
            raise click.ClickException(f"no transcript directory: {directory}")
        specs.append(SystemSpec(name=name, source=transcript_source(directory)))
    gateway = None
    if truth_mode == "judge":
        from .gateway import Gateway

        config = GatewayConfig.from_env()
        if not config.fixture_dir:
            config.fixture_dir = os.path.join(corpus, "llm_fixtures")
        gateway = Gateway(config)
    report = run_eval(corpus, specs, truth_mode=truth_mode, gateway=gateway)
    data = export_report(report, fmt)
    with open(out, "wb") as fh:
        fh.write(data)
    for agg in report.aggregates():
        click.echo(
            f"{agg.system}: invalid total {agg.invalid_total} (max {agg.invalid_max}), "
            f"missing total {agg.missing_total} (max {agg.missing_max})"
        )
    click.echo(f"wrote {out}")


@main.group()
def kg():
    """Knowledge store commands."""


@kg.command("stats")
@click.option("--kg", "kg_path", default="data/kg.json", show_default=True)
def kg_stats(kg_path):
    """Print store statistics."""
    if not os.path.exists(kg_path):
        raise click.ClickException(f"no store file at {kg_path}")
    graph = store.load(kg_path)
    stats = graph.stats()
    click.echo(f"terms: {stats.term_count}")
    click.echo(f"triples: {stats.triple_count}")
    click.echo(f"relation types: {stats.relation_type_count}")
    click.echo(f"version: {graph.version}")


@kg.command("export")
@click.option("--kg", "kg_path", default="data/kg.json", show_default=True)
@click.option(
    "--format", "fmt", default="json", show_default=True,
    type=click.Choice(["json", "graph"]),
)
def kg_export(kg_path, fmt):
    """Write the store to stdout (canonical json, or nodes/edges graph)."""
    if not os.path.exists(kg_path):
        raise click.ClickException(f"no store file at {kg_path}")
    graph = store.load(kg_path)
    if fmt == "json":
        sys.stdout.buffer.write(store.serialize(graph))
        return
    from .graphs import reasoning_graph_from_kg

    doc = reasoning_graph_from_kg(graph).to_dict()
    click.echo(json.dumps(doc, indent=2, ensure_ascii=False))


if __name__ == "__main__":
    main()
