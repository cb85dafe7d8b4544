"""Append-oriented, deterministic triple store.

The knowledge graph repository grows as questions are answered: extracted
facts are merged with set semantics on the normalized (subject, predicate,
object) key, so relearning a fact is a duplicate rather than a new edge.
Serialization is canonical (sorted, fixed key order, two-space indent) so
equal graphs produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import re
import threading
import unicodedata
from collections import deque
from dataclasses import dataclass, field

from .textutil import STOPWORDS, tokenize

_WS = re.compile(r"\s+")

PROVENANCE_KINDS = ("learned", "human", "inferred", "seed")


class EmptyTermError(ValueError):
    """Raised when a term or predicate is blank after normalization."""


class FormatError(ValueError):
    """Malformed knowledge-graph file."""

    def __init__(self, message: str, line: int = 0, offset: int = 0):
        super().__init__(f"{message} (line {line}, offset {offset})")
        self.line = line
        self.offset = offset


def normalize_text(raw: str) -> str:
    """Canonical form: NFC, lowercased, whitespace collapsed, trimmed."""
    return _WS.sub(" ", unicodedata.normalize("NFC", raw)).strip().lower()


@dataclass(frozen=True)
class TermId:
    """A graph node: normalized id plus the original-cased display label."""

    id: str
    display_label: str = field(compare=False)

    def __post_init__(self):
        if not self.id:
            raise EmptyTermError("term id is empty")


def normalize_term(raw: str) -> TermId:
    """Normalize a raw term string, preserving its casing as the label.

    Idempotent: normalizing the display label again yields the same id.
    """
    norm = normalize_text(raw)
    if not norm:
        raise EmptyTermError(f"term is blank: {raw!r}")
    label = _WS.sub(" ", unicodedata.normalize("NFC", raw)).strip()
    return TermId(id=norm, display_label=label)


def normalize_predicate(raw: str) -> str:
    norm = normalize_text(raw)
    if not norm:
        raise EmptyTermError(f"predicate is blank: {raw!r}")
    return norm


@dataclass(frozen=True)
class Provenance:
    kind: str
    ref: str = ""

    def __post_init__(self):
        if self.kind not in PROVENANCE_KINDS:
            raise ValueError(f"unknown provenance kind: {self.kind!r}")

    @classmethod
    def learned(cls, question_id: str) -> "Provenance":
        return cls("learned", question_id)

    @classmethod
    def human(cls, author_id: str) -> "Provenance":
        return cls("human", author_id)

    @classmethod
    def inferred(cls, rule_id: str) -> "Provenance":
        return cls("inferred", rule_id)

    @classmethod
    def seed(cls) -> "Provenance":
        return cls("seed")


@dataclass(frozen=True)
class Triple:
    """One fact edge. Identity is the normalized (s, p, o) key only."""

    subject: TermId
    predicate: str
    object: TermId
    provenance: Provenance
    created_at: int = 0

    def key(self) -> tuple[str, str, str]:
        return (self.subject.id, self.predicate, self.object.id)


def make_triple(
    subject: str,
    predicate: str,
    obj: str,
    provenance: Provenance,
    created_at: int = 0,
) -> Triple:
    return Triple(
        subject=normalize_term(subject),
        predicate=normalize_predicate(predicate),
        object=normalize_term(obj),
        provenance=provenance,
        created_at=created_at,
    )


@dataclass(frozen=True)
class MergeOutcome:
    added: int
    duplicates: int


@dataclass(frozen=True)
class GraphSnapshotStats:
    term_count: int
    triple_count: int
    relation_type_count: int


@dataclass(frozen=True)
class GrowthDelta:
    d_triples: int
    d_edges: int
    d_terms: int
    d_relation_types: int


def growth(before: GraphSnapshotStats, after: GraphSnapshotStats) -> GrowthDelta:
    """Field-wise difference; each triple renders one edge, so d_edges mirrors d_triples."""
    d_triples = after.triple_count - before.triple_count
    return GrowthDelta(
        d_triples=d_triples,
        d_edges=d_triples,
        d_terms=after.term_count - before.term_count,
        d_relation_types=after.relation_type_count - before.relation_type_count,
    )


class KnowledgeGraph:
    """Single-writer / multi-reader triple set with monotone version counter.

    Mutations are serialized behind a lock and apply atomically: readers
    observe either the old or the new state, never a partial merge.
    """

    def __init__(self):
        self._terms: dict[str, TermId] = {}
        self._triples: dict[tuple[str, str, str], Triple] = {}
        self._version = 0
        self._lock = threading.RLock()

    @property
    def version(self) -> int:
        with self._lock:
            return self._version

    def terms(self) -> list[TermId]:
        with self._lock:
            return sorted(self._terms.values(), key=lambda t: t.id)

    def triples(self) -> list[Triple]:
        with self._lock:
            return [self._triples[k] for k in sorted(self._triples)]

    def has_triple(self, key: tuple[str, str, str]) -> bool:
        with self._lock:
            return key in self._triples

    def label_for(self, term_id: str) -> str:
        with self._lock:
            term = self._terms.get(term_id)
            return term.display_label if term else term_id

    def add_triples(self, new: list[Triple]) -> MergeOutcome:
        """Set union on the normalized key; first writer keeps provenance."""
        with self._lock:
            added = 0
            duplicates = 0
            for triple in new:
                key = triple.key()
                if key in self._triples:
                    duplicates += 1
                    continue
                self._triples[key] = triple
                for term in (triple.subject, triple.object):
                    self._terms.setdefault(term.id, term)
                added += 1
            if added > 0:
                self._version += 1
            return MergeOutcome(added=added, duplicates=duplicates)

    def stats(self) -> GraphSnapshotStats:
        with self._lock:
            return GraphSnapshotStats(
                term_count=len(self._terms),
                triple_count=len(self._triples),
                relation_type_count=len({k[1] for k in self._triples}),
            )

    def match_seed_terms(self, seeds: set[str]) -> set[str]:
        """Term ids matching a seed exactly or containing it as whole words."""
        with self._lock:
            norm_seeds = {normalize_text(s) for s in seeds}
            norm_seeds.discard("")
            matched: set[str] = set()
            for term_id in self._terms:
                padded = f" {term_id} "
                for seed in norm_seeds:
                    if term_id == seed or f" {seed} " in padded:
                        matched.add(term_id)
                        break
            return matched

    def _adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {t: set() for t in self._terms}
        for s, _p, o in self._triples:
            adj[s].add(o)
            adj[o].add(s)
        return adj

    def _distances(self, sources: set[str], limit: int) -> dict[str, int]:
        adj = self._adjacency()
        dist = {t: 0 for t in sources}
        queue = deque(sources)
        while queue:
            node = queue.popleft()
            if dist[node] >= limit:
                continue
            for neighbor in adj.get(node, ()):
                if neighbor not in dist:
                    dist[neighbor] = dist[node] + 1
                    queue.append(neighbor)
        return dist

    def subgraph(self, seed_terms: set[str], hops: int) -> "KnowledgeGraph":
        """Triples whose endpoints both lie within `hops` undirected steps
        of any matched seed term. Unmatched seeds yield an empty graph."""
        if hops < 0:
            raise ValueError("hops must be >= 0")
        with self._lock:
            matched = self.match_seed_terms(seed_terms)
            result = KnowledgeGraph()
            if not matched:
                return result
            dist = self._distances(matched, hops)
            keep = [
                t
                for k, t in sorted(self._triples.items())
                if k[0] in dist and k[2] in dist
            ]
            result.add_triples(keep)
            return result

    def context_subgraph(
        self, question: str, hops: int = 2, cap: int = 200
    ) -> "KnowledgeGraph":
        """Question-relevant subgraph: seeds are the question's content words;
        capped at `cap` triples, nearest hop first, then (s, p, o) order."""
        seeds = {t for t in tokenize(question) if t not in STOPWORDS}
        with self._lock:
            matched = self.match_seed_terms(seeds)
            result = KnowledgeGraph()
            if not matched:
                return result
            dist = self._distances(matched, hops)
            candidates = [
                (max(dist[k[0]], dist[k[2]]), k, t)
                for k, t in self._triples.items()
                if k[0] in dist and k[2] in dist
            ]
            candidates.sort(key=lambda c: (c[0], c[1]))
            result.add_triples([t for _, _, t in candidates[:cap]])
            return result

    def snapshot(self) -> "KnowledgeGraph":
        with self._lock:
            clone = KnowledgeGraph()
            clone._terms = dict(self._terms)
            clone._triples = dict(self._triples)
            clone._version = self._version
            return clone

    def to_dict(self) -> dict:
        with self._lock:
            return {
                "version": self._version,
                "terms": [
                    {"id": t.id, "label": t.display_label}
                    for t in sorted(self._terms.values(), key=lambda t: t.id)
                ],
                "triples": [
                    {
                        "s": t.subject.id,
                        "p": t.predicate,
                        "o": t.object.id,
                        "prov": t.provenance.kind,
                        "prov_ref": t.provenance.ref,
                        "ts": t.created_at,
                    }
                    for _, t in sorted(self._triples.items())
                ],
            }

    def triple_keys(self) -> set[tuple[str, str, str]]:
        with self._lock:
            return set(self._triples)


def serialize(graph: KnowledgeGraph) -> bytes:
    """Canonical byte form: fixed key order, sorted arrays, two-space indent,
    trailing newline. Equal graphs serialize identically."""
    text = json.dumps(graph.to_dict(), indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def save(graph: KnowledgeGraph, path: str) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    data = serialize(graph)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = os.path.join(directory, f".{os.path.basename(path)}.tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def load(path: str) -> KnowledgeGraph:
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, line=exc.lineno, offset=exc.colno) from exc
    if not isinstance(doc, dict):
        raise FormatError("top-level value must be an object")
    for key in ("version", "terms", "triples"):
        if key not in doc:
            raise FormatError(f"missing key {key!r}")
    labels = {}
    for i, entry in enumerate(doc["terms"]):
        if not isinstance(entry, dict) or "id" not in entry:
            raise FormatError(f"terms[{i}] is not a term object")
        labels[entry["id"]] = entry.get("label", entry["id"])
    graph = KnowledgeGraph()
    triples = []
    for i, entry in enumerate(doc["triples"]):
        try:
            subject = entry["s"]
            predicate = entry["p"]
            obj = entry["o"]
            prov = Provenance(entry["prov"], entry.get("prov_ref", ""))
            ts = int(entry.get("ts", 0))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"triples[{i}]: {exc}") from exc
        triples.append(
            Triple(
                subject=TermId(subject, labels.get(subject, subject)),
                predicate=predicate,
                object=TermId(obj, labels.get(obj, obj)),
                provenance=prov,
                created_at=ts,
            )
        )
    graph.add_triples(triples)
    graph._version = int(doc["version"])
    return graph
