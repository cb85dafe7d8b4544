"""Knowledge extraction, merging, rule inference, and curation.

Extraction turns model graph payloads into normalized triples. Inference
applies two rules to the causal vocabulary until fixpoint:

  R1  (a, causes, b)      =>  (b, caused by, a)   and the inverse direction
  R2  (a, causes, b) and (b, causes|may cause, c)  =>  (a, may cause, c)

Inferred triples are tagged with their rule and never displace an existing
fact with the same key.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

from .gateway import Gateway
from .graphs import (
    GraphEdge,
    GraphNode,
    PayloadUnparseable,
    ReasoningGraph,
    parse_graph_payload,
)
from .retrieval import RetrievedDocument
from .store import (
    EmptyTermError,
    GraphSnapshotStats,
    KnowledgeGraph,
    MergeOutcome,
    Provenance,
    Triple,
    make_triple,
    normalize_text,
)

CAUSES = "causes"
CAUSED_BY = "caused by"
MAY_CAUSE = "may cause"
CAUSAL_PREDICATES = frozenset({CAUSES, CAUSED_BY, MAY_CAUSE})


class LearningError(Exception):
    pass


class ValidationError(LearningError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class ExtractionResult:
    triples: list[Triple] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def payload_to_triples(
    payload, provenance: Provenance, created_at: int
) -> ExtractionResult:
    result = ExtractionResult(warnings=list(payload.warnings))
    seen: set[tuple[str, str, str]] = set()
    for edge in payload.edges:
        try:
            triple = make_triple(
                edge.source, edge.label, edge.target, provenance, created_at
            )
        except EmptyTermError as exc:
            result.warnings.append(f"dropped unusable edge: {exc}")
            continue
        if triple.subject.id == triple.object.id:
            result.warnings.append(
                f"dropped self-loop: {triple.subject.id} -{triple.predicate}-"
            )
            continue
        key = triple.key()
        if key in seen:
            continue
        seen.add(key)
        result.triples.append(triple)
    return result


def extract_knowledge(
    docs: list[RetrievedDocument],
    question: str,
    gateway: Gateway,
    question_id: str,
    created_at: int,
) -> ExtractionResult:
    """Run the graph-update prompt over the retrieved batch and normalize."""
    if not docs:
        return ExtractionResult(warnings=["no documents retrieved; nothing to extract"])
    batch_text = "\n\n".join(
        f"Source: {d.url}\n{d.text}" for d in sorted(docs, key=lambda d: d.url)
    )
    request = gateway.request("graph_update", {"tempath": batch_text})
    response = gateway.complete(request)
    try:
        payload = parse_graph_payload(response.content)
    except PayloadUnparseable as first_error:
        messages = list(request.messages)
        user = messages[-1]
        messages[-1] = type(user)(
            role=user.role,
            content=(
                f"{user.content}\n\nThe previous output could not be parsed: "
                f"{first_error.detail}. Provide only valid JSON."
            ),
        )
        retry = type(request)(
            template=request.template,
            messages=tuple(messages),
            model=request.model,
            temperature=request.temperature,
        )
        payload = parse_graph_payload(gateway.complete(retry).content)
    return payload_to_triples(
        payload, Provenance.learned(question_id), created_at
    )


@dataclass
class LearnOutcome:
    merge: MergeOutcome
    before: GraphSnapshotStats
    after: GraphSnapshotStats


def learn(graph: KnowledgeGraph, extraction: ExtractionResult) -> LearnOutcome:
    before = graph.stats()
    merge = graph.add_triples(extraction.triples)
    return LearnOutcome(merge=merge, before=before, after=graph.stats())


def is_causal_predicate(predicate: str) -> bool:
    return predicate in CAUSAL_PREDICATES or "cause" in predicate.split()


def infer(graph: KnowledgeGraph, created_at: int = 0) -> list[Triple]:
    """Closure delta under R1/R2. Pure: the graph is not modified.

    Returns only triples whose key is absent from the graph, in sorted key
    order, tagged with the rule that first derived them.
    """
    base = graph.triple_keys()
    known: dict[tuple[str, str, str], str] = {}
    for key in base:
        known[key] = ""
    changed = True
    while changed:
        changed = False
        snapshot = sorted(known)
        causes_out: dict[str, list[tuple[str, str]]] = {}
        for s, p, o in snapshot:
            if p in (CAUSES, MAY_CAUSE):
                causes_out.setdefault(s, []).append((p, o))
        for s, p, o in snapshot:
            if p == CAUSES:
                candidate = (o, CAUSED_BY, s)
                if candidate not in known:
                    known[candidate] = "R1"
                    changed = True
            elif p == CAUSED_BY:
                candidate = (o, CAUSES, s)
                if candidate not in known:
                    known[candidate] = "R1"
                    changed = True
            if p == CAUSES:
                for p2, c in causes_out.get(o, ()):
                    if c != s:
                        candidate = (s, MAY_CAUSE, c)
                        if candidate not in known:
                            known[candidate] = "R2"
                            changed = True
    labels = {t.id: t.display_label for t in graph.terms()}
    delta = []
    for key in sorted(k for k in known if k not in base):
        s, p, o = key
        delta.append(
            make_triple(
                labels.get(s, s),
                p,
                labels.get(o, o),
                Provenance.inferred(known[key]),
                created_at,
            )
        )
    return delta


def causal_subgraph(graph: KnowledgeGraph, topic: str, hops: int = 2) -> ReasoningGraph:
    """Causal triples within `hops` undirected steps of the topic term."""
    norm_topic = normalize_text(topic)
    if not norm_topic:
        return ReasoningGraph()
    sub = graph.subgraph({norm_topic}, hops)
    result = ReasoningGraph()
    node_ids: set[str] = set()
    for triple in sub.triples():
        if not is_causal_predicate(triple.predicate):
            continue
        for term in (triple.subject, triple.object):
            if term.id not in node_ids:
                node_ids.add(term.id)
                result.nodes.append(GraphNode(id=term.id, label=term.display_label))
        result.edges.append(
            GraphEdge(
                source=triple.subject.id,
                label=triple.predicate,
                target=triple.object.id,
            )
        )
    result.validate()
    return result


def append_audit_entry(path: str, author: str, action: str, triple_count: int) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    entry = {
        "timestamp": int(time.time()),
        "author": author,
        "action": action,
        "triple_count": triple_count,
    }
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, ensure_ascii=False) + "\n")


def add_human_knowledge(
    graph: KnowledgeGraph,
    edges: list[dict],
    author_id: str,
    created_at: int = 0,
    audit_path: str | None = None,
) -> MergeOutcome:
    """Merge expert-provided edges atomically with human provenance.

    The payload uses the explanation-graph edge schema:
    {"source": ..., "label": ..., "target": ...}. Any invalid row aborts the
    whole batch.
    """
    if not author_id or not author_id.strip():
        raise ValidationError(["author_id must be non-empty"])
    problems: list[str] = []
    triples: list[Triple] = []
    provenance = Provenance.human(author_id.strip())
    for i, edge in enumerate(edges):
        source = str(edge.get("source", ""))
        label = str(edge.get("label", ""))
        target = str(edge.get("target", ""))
        try:
            triples.append(make_triple(source, label, target, provenance, created_at))
        except EmptyTermError as exc:
            problems.append(f"edge {i}: {exc}")
    if problems:
        raise ValidationError(problems)
    outcome = graph.add_triples(triples)
    if audit_path:
        append_audit_entry(
            audit_path, author_id, "add_human_knowledge", outcome.added
        )
    return outcome
