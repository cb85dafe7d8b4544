"""CLI surface, exercised against the bundled corpus in replay mode."""

import json
from pathlib import Path

from click.testing import CliRunner

from kgil.cli import main

ROOT = Path(__file__).resolve().parent.parent
CORPUS = str(ROOT / "fixtures" / "corpus")
PNEUMONIA_Q = "What are the symptoms of Pneumonia and how can it be prevented?"


def test_ask_replay(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main,
        [
            "ask", PNEUMONIA_Q,
            "--kg", str(tmp_path / "kg.json"),
            "--corpus", CORPUS,
            "--mode", "replay",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "Pneumonia" in result.output
    assert "source: https://health.example/conditions/pneumonia/" in result.output
    assert "triples" in result.output


def test_ask_json_output(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main,
        [
            "ask", PNEUMONIA_Q,
            "--kg", str(tmp_path / "kg.json"),
            "--corpus", CORPUS,
            "--mode", "replay",
            "--json",
        ],
    )
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["kg_stats_after"]["triple_count"] > 0
    assert doc["timing"]["t_total"] >= 0


def test_eval_run_writes_report(tmp_path):
    runner = CliRunner()
    out = tmp_path / "report.csv"
    result = runner.invoke(
        main,
        [
            "eval", "run",
            "--corpus", CORPUS,
            "--systems", "rag-kg-il,rag-only,baseline-llm",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "rag-kg-il: invalid total 35" in result.output
    assert "baseline-llm: invalid total 129" in result.output
    data = out.read_text(encoding="utf-8")
    assert data.count("\n") == 1 + 60 + 3  # header + rows + totals
    assert '"TOTAL","rag-only","49","54"' in data


def test_eval_unknown_system_errors(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["eval", "run", "--corpus", CORPUS, "--systems", "nonexistent",
         "--out", str(tmp_path / "r.csv")],
    )
    assert result.exit_code != 0
    assert "no transcript directory" in result.output


def test_kg_stats_and_export(tmp_path):
    runner = CliRunner()
    kg_path = str(ROOT / "fixtures" / "kg" / "after_20.json")
    result = runner.invoke(main, ["kg", "stats", "--kg", kg_path])
    assert result.exit_code == 0, result.output
    assert "terms: 226" in result.output
    assert "triples: 420" in result.output
    assert "relation types: 36" in result.output

    result = runner.invoke(main, ["kg", "export", "--kg", kg_path, "--format", "graph"])
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert len(doc["nodes"]) == 226
    assert len(doc["edges"]) == 420


def test_kg_export_json_is_canonical(tmp_path):
    runner = CliRunner()
    kg_path = str(ROOT / "fixtures" / "kg" / "after_2.json")
    result = runner.invoke(main, ["kg", "export", "--kg", kg_path, "--format", "json"])
    assert result.exit_code == 0
    assert result.output.encode("utf-8") == Path(kg_path).read_bytes()
