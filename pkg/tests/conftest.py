"""Shared test helpers: seeded random graph generation and scripted gateways."""

from __future__ import annotations

import random

import pytest

from kgil.gateway import Gateway, GatewayConfig
from kgil.store import KnowledgeGraph, Provenance, make_triple

WORDS = [
    "fever", "cough", "rash", "fatigue", "nausea", "vertigo", "tremor",
    "lesion", "edema", "anemia", "sepsis", "asthma", "angina", "colic",
    "polyp", "ulcer", "spasm", "cramp", "chill", "ache", "burn", "clot",
    "cyst", "mole", "wart", "scar", "sting", "swelling", "stiffness",
    "numbness", "itching", "wheeze", "hiccup", "strain", "sprain",
]

PREDICATES = [
    "has symptom", "treated with", "prevented by", "affects", "includes",
    "relieves", "worsens", "requires", "precedes", "follows",
]


def random_term(rng: random.Random) -> str:
    n = rng.randint(1, 3)
    return " ".join(rng.choice(WORDS) for _ in range(n))


def random_triples(rng: random.Random, count: int, term_pool: int = 40):
    terms = list({random_term(rng) for _ in range(term_pool)})
    triples = []
    for _ in range(count):
        s = rng.choice(terms)
        o = rng.choice(terms)
        if s == o:
            continue
        triples.append(
            make_triple(s, rng.choice(PREDICATES), o, Provenance.seed(), 0)
        )
    return triples


def random_graph(rng: random.Random, count: int, term_pool: int = 40) -> KnowledgeGraph:
    graph = KnowledgeGraph()
    graph.add_triples(random_triples(rng, count, term_pool))
    return graph


class ScriptedTransport:
    """Transport stub: answers requests from a queue or a resolver callable."""

    def __init__(self, responses=None, resolver=None):
        self.responses = list(responses or [])
        self.resolver = resolver
        self.calls: list[dict] = []

    def __call__(self, body: dict) -> tuple[str, str]:
        self.calls.append(body)
        if self.resolver is not None:
            return self.resolver(body), "scripted"
        if not self.responses:
            raise AssertionError("scripted transport exhausted")
        return self.responses.pop(0), "scripted"


class ExplodingTransport:
    """Fails the test if any network-like call is attempted."""

    def __call__(self, body: dict):
        raise AssertionError("transport used in replay mode")


# Marker strings that identify which prompt a wire request was rendered from.
TEMPLATE_MARKERS = {
    "data_selection": "You are a web link search engine",
    "fusion_answer": "Knowledge Graph data and generated text data",
    "graph_output": "First summerise the keywords",
    "graph_update": "relationships between medical terms and key sentences",
    "truth_check": "You are an expert evaluator",
}


def template_of(body: dict) -> str:
    system = body["messages"][0]["content"]
    for name, marker in TEMPLATE_MARKERS.items():
        if marker in system:
            return name
    raise AssertionError(f"unrecognized prompt: {system[:80]!r}")


class PipelineScript:
    """Resolver that answers each pipeline stage from per-template handlers.

    Handlers receive the wire body and return the response content string.
    """

    def __init__(self, **handlers):
        self.handlers = handlers
        self.calls: list[str] = []

    def __call__(self, body: dict) -> str:
        name = template_of(body)
        self.calls.append(name)
        handler = self.handlers.get(name)
        if handler is None:
            raise AssertionError(f"no handler scripted for template {name}")
        return handler(body) if callable(handler) else handler


@pytest.fixture
def scripted_gateway(tmp_path):
    def build(responses=None, resolver=None, mode="live"):
        transport = ScriptedTransport(responses=responses, resolver=resolver)
        config = GatewayConfig(mode=mode, fixture_dir=str(tmp_path / "fixtures"))
        return Gateway(config, transport=transport), transport

    return build
