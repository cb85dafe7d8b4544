"""Fusion rendering, deterministic embedding, chunk ranking, generation,
and reasoning-graph construction."""

import random

import numpy as np
import pytest

from kgil.answering import (
    DEFAULT_DIMENSION,
    EmptyAnswer,
    GraphParseError,
    build_reasoning_graph,
    fuse,
    generate_answer,
    hash_embed,
    rank_chunks,
    split_removed_section,
    vectorize,
)
from kgil.gateway import Gateway, GatewayConfig
from kgil.retrieval import RetrievedDocument
from kgil.store import KnowledgeGraph, Provenance, make_triple

from conftest import ScriptedTransport


def doc(url, text):
    return RetrievedDocument(url=url, text=text, fetched_at=0.0, fetch_latency=0.0)


def make_gateway(responses):
    return Gateway(
        GatewayConfig(mode="live"), transport=ScriptedTransport(responses=responses)
    )


class TestFuse:
    def test_empty_inputs(self):
        fused = fuse("q", [], KnowledgeGraph())
        assert fused.kg_block == ""
        assert fused.text_block == ""
        assert fused.docs == ()

    def test_matches_string_builder_oracle(self):
        graph = KnowledgeGraph()
        graph.add_triples(
            [
                make_triple("b", "includes", "c", Provenance.seed()),
                make_triple("a", "affects", "b", Provenance.seed()),
            ]
        )
        docs = [doc("https://x.example/2", "second"), doc("https://x.example/1", "first")]
        fused = fuse("q", docs, graph)
        # Oracle: build the exact strings by hand from the contract.
        assert fused.kg_block == "a — affects — b\nb — includes — c"
        assert fused.text_block == (
            "Source: https://x.example/1\nfirst\n\nSource: https://x.example/2\nsecond"
        )

    def test_pneumonia_relation_renders(self):
        graph = KnowledgeGraph()
        graph.add_triples(
            [make_triple("Pneumonia", "Caused By", "Infection", Provenance.seed())]
        )
        fused = fuse("q", [], graph)
        assert "pneumonia — caused by — infection" in fused.kg_block

    def test_rendering_is_deterministic(self):
        docs = [doc("https://x.example/1", "alpha\n\nbeta")]
        graph = KnowledgeGraph()
        graph.add_triples([make_triple("a", "p", "b", Provenance.seed())])
        assert fuse("q", docs, graph) == fuse("q", docs, graph)


class TestVectorize:
    def test_empty_context_zero_chunks(self):
        fused = fuse("q", [], KnowledgeGraph())
        assert vectorize(fused).chunks == []

    def test_determinism_and_self_similarity(self):
        fused = fuse("q", [doc("https://x.example/1", "fever and cough\n\nrest")], KnowledgeGraph())
        a = vectorize(fused)
        b = vectorize(fused)
        assert len(a.chunks) == len(b.chunks)
        for ca, cb in zip(a.chunks, b.chunks):
            assert np.array_equal(ca.vector, cb.vector)
            assert np.dot(ca.vector, ca.vector) == pytest.approx(1.0, abs=1e-9)

    def test_norms_and_token_budget_property(self):
        rng = random.Random(5)
        words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
        for _ in range(100):
            paragraphs = []
            for _ in range(rng.randint(1, 12)):
                count = rng.randint(1, 300)
                paragraphs.append(" ".join(rng.choice(words) for _ in range(count)))
            fused = fuse(
                "q", [doc("https://x.example/1", "\n\n".join(paragraphs))], KnowledgeGraph()
            )
            embedded = vectorize(fused)
            assert embedded.chunks, "non-empty text must produce chunks"
            for chunk in embedded.chunks:
                assert len(chunk.text.split()) <= 400  # recount oracle
                norm = float(np.linalg.norm(chunk.vector))
                assert norm == pytest.approx(1.0, abs=1e-9)

    def test_chunk_urls_track_documents(self):
        fused = fuse(
            "q",
            [doc("https://x.example/1", "one"), doc("https://x.example/2", "two")],
            KnowledgeGraph(),
        )
        embedded = vectorize(fused)
        assert {c.url for c in embedded.chunks} == {
            "https://x.example/1",
            "https://x.example/2",
        }


class TestRankChunks:
    def test_matches_exhaustive_sort(self):
        rng = random.Random(9)
        words = [f"w{i}" for i in range(30)]
        for _ in range(50):
            texts = [
                " ".join(rng.choice(words) for _ in range(rng.randint(3, 20)))
                for _ in range(rng.randint(1, 25))
            ]
            fused = fuse(
                "q", [doc("https://x.example/1", "\n\n".join(texts))], KnowledgeGraph()
            )
            embedded = vectorize(fused)
            question_vec = hash_embed(" ".join(rng.sample(words, 5)), DEFAULT_DIMENSION)
            k = rng.randint(1, 10)
            got = rank_chunks(question_vec, embedded, k)
            # Oracle: exhaustive cosine sort with index tiebreak.
            scores = [
                (-float(np.dot(question_vec, c.vector)), i)
                for i, c in enumerate(embedded.chunks)
            ]
            expected = [i for _, i in sorted(scores)[:k]]
            assert got == expected


class TestSplitRemovedSection:
    def test_none_marker(self):
        text, removed = split_removed_section("The answer.\nREMOVED:\nnone")
        assert text == "The answer."
        assert removed == []

    def test_claims_listed(self):
        text, removed = split_removed_section(
            "Body line one.\nBody line two.\nREMOVED:\nclaim a\nclaim b"
        )
        assert text == "Body line one.\nBody line two."
        assert removed == ["claim a", "claim b"]

    def test_missing_marker(self):
        text, removed = split_removed_section("Just the answer.")
        assert text == "Just the answer."
        assert removed == []


class TestGenerateAnswer:
    def _fused(self):
        return fuse(
            "What are the causes of Acne and its treatment?",
            [doc("https://health.example/conditions/acne/", "Acne is caused by oily skin.")],
            KnowledgeGraph(),
        )

    def test_answer_with_sources(self):
        fused = self._fused()
        embedded = vectorize(fused)
        gateway = make_gateway(["Acne is caused by oily skin.\nREMOVED:\nnone"])
        answer = generate_answer(
            fused.question, fused, embedded, gateway, question_id="q19"
        )
        assert answer.text == "Acne is caused by oily skin."
        assert answer.sources == ["https://health.example/conditions/acne/"]
        assert answer.removed_claims == []

    def test_zero_chunks_still_answers(self):
        fused = fuse("q", [], KnowledgeGraph())
        embedded = vectorize(fused)
        gateway = make_gateway(["An answer from the graph alone.\nREMOVED:\nnone"])
        answer = generate_answer("q", fused, embedded, gateway, question_id="q1")
        assert answer.text
        assert answer.sources == []

    def test_blank_answer_rejected(self):
        fused = self._fused()
        gateway = make_gateway(["\nREMOVED:\nnone"])
        with pytest.raises(EmptyAnswer):
            generate_answer(fused.question, fused, vectorize(fused), gateway, question_id="q")

    def test_removed_claims_parsed(self):
        fused = self._fused()
        gateway = make_gateway(
            ["Acne is caused by oily skin.\nREMOVED:\nchocolate causes acne"]
        )
        answer = generate_answer(fused.question, fused, vectorize(fused), gateway, question_id="q")
        assert answer.removed_claims == ["chocolate causes acne"]


class TestBuildReasoningGraph:
    def test_payload_parsed(self):
        gateway = make_gateway(
            ['{"nodes": [{"id": "Term1", "label": "D1"}, {"id": "Term2", "label": "D2"}], '
             '"edges": [{"source": "Term1", "label": "relation", "target": "Term2"}]}']
        )
        graph, warnings = build_reasoning_graph("text", gateway)
        assert len(graph.nodes) == 2
        assert len(graph.edges) == 1
        assert warnings == []

    def test_dangling_edge_repaired(self):
        gateway = make_gateway(
            ['{"nodes": [{"id": "A", "label": "A"}], '
             '"edges": [{"source": "A", "label": "r", "target": "Ghost"}]}']
        )
        graph, warnings = build_reasoning_graph("text", gateway)
        assert "Ghost" in graph.node_ids()
        assert any("auto-added" in w for w in warnings)

    def test_empty_graph_ok(self):
        gateway = make_gateway(['{"nodes": [], "edges": []}'])
        graph, _ = build_reasoning_graph("text", gateway)
        assert graph.nodes == [] and graph.edges == []

    def test_retry_once_then_error(self):
        gateway = make_gateway(["not a graph", "still not a graph"])
        with pytest.raises(GraphParseError):
            build_reasoning_graph("text", gateway)

    def test_retry_recovers(self):
        gateway = make_gateway(
            ["garbage", '{"nodes": [{"id": "A"}], "edges": []}']
        )
        graph, _ = build_reasoning_graph("text", gateway)
        assert [n.id for n in graph.nodes] == ["A"]
