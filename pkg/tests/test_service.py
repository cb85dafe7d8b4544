"""HTTP surface: request/response schemas and error mapping."""

import json

import pytest
from fastapi.testclient import TestClient

from kgil.orchestrator import Engine, EngineConfig
from kgil.gateway import GatewayConfig
from kgil.service import create_app

from conftest import ScriptedTransport
from test_orchestrator import default_script, write_corpus, PNEUMONIA_URL


@pytest.fixture
def client(tmp_path):
    corpus = write_corpus(tmp_path)
    config = EngineConfig(
        corpus_dir=str(corpus),
        kg_path=str(tmp_path / "kg.json"),
        gateway=GatewayConfig(mode="live"),
        audit_path=str(tmp_path / "audit.log"),
    )
    engine = Engine(config, transport=ScriptedTransport(resolver=default_script()))
    return TestClient(create_app(engine))


class TestHealth:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json()["status"] == "ok"


class TestAskEndpoint:
    def test_ask_round_trip(self, client):
        response = client.post("/ask", json={"text": "pneumonia?"})
        assert response.status_code == 200
        doc = response.json()
        assert "Pneumonia is swelling" in doc["answer"]["text"]
        assert doc["answer"]["sources"] == [PNEUMONIA_URL]
        assert doc["kg_stats_after"]["triple_count"] == 2
        timing = doc["timing"]
        assert timing["t_total"] == pytest.approx(
            timing["t_L"] + timing["t_R"] + timing["t_A"]
        )

    def test_empty_text_rejected(self, client):
        assert client.post("/ask", json={"text": ""}).status_code == 422


class TestGraphEndpoints:
    def test_graph_and_causality(self, client):
        client.post("/ask", json={"text": "pneumonia?"})
        graph = client.get("/graph").json()
        assert {n["id"] for n in graph["nodes"]} == {"pneumonia", "infection", "cough"}
        topical = client.get("/graph", params={"topic": "cough", "hops": 1}).json()
        assert {n["id"] for n in topical["nodes"]} <= {"pneumonia", "infection", "cough"}
        causal = client.get("/causality", params={"topic": "pneumonia"}).json()
        assert causal["edges"] == [
            {"source": "pneumonia", "label": "caused by", "target": "infection"}
        ]

    def test_negative_hops_rejected(self, client):
        assert client.get("/graph", params={"hops": -1}).status_code == 422


class TestKnowledgeEndpoint:
    def test_author_in_body(self, client):
        response = client.post(
            "/knowledge",
            json={
                "edges": [
                    {"source": "pneumonia", "label": "treated with", "target": "antibiotics"}
                ],
                "author": "dr-lee",
            },
        )
        assert response.status_code == 200
        assert response.json() == {"added": 1, "duplicates": 0}

    def test_author_header(self, client):
        response = client.post(
            "/knowledge",
            json={"edges": [{"source": "a", "label": "p", "target": "b"}]},
            headers={"X-Author": "dr-kim"},
        )
        assert response.status_code == 200

    def test_author_missing(self, client):
        response = client.post(
            "/knowledge", json={"edges": [{"source": "a", "label": "p", "target": "b"}]}
        )
        assert response.status_code == 422

    def test_invalid_edge_maps_to_422(self, client):
        response = client.post(
            "/knowledge",
            json={"edges": [{"source": " ", "label": "p", "target": "b"}], "author": "x"},
        )
        assert response.status_code == 422
        assert "edge 0" in json.dumps(response.json())


class TestMetricsEndpoint:
    def test_fresh_engine_empty(self, client):
        doc = client.get("/metrics").json()
        assert doc["kg_stats"]["triple_count"] == 0
        assert doc["timing_history"] == []

    def test_history_grows(self, client):
        client.post("/ask", json={"text": "pneumonia?"})
        doc = client.get("/metrics").json()
        assert len(doc["timing_history"]) == 1
        row = doc["timing_history"][0]
        assert row["timing"]["t_total"] == pytest.approx(
            row["timing"]["t_L"] + row["timing"]["t_R"] + row["timing"]["t_A"]
        )
