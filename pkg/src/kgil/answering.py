"""Answer generation: fuse retrieved text with the question-relevant
subgraph, vectorize, rank chunks against the question, and produce a
grounded answer plus its explanation graph.

The default embedder is offline and deterministic (feature hashing of token
unigrams, L2-normalized); a provider-backed embedder can be plugged in
behind the same callable contract.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gateway import Gateway
from .graphs import (
    PayloadUnparseable,
    ReasoningGraph,
    parse_graph_payload,
    reasoning_graph_from_payload,
)
from .retrieval import RetrievedDocument
from .store import KnowledgeGraph
from .textutil import tokenize

DEFAULT_DIMENSION = 256
MAX_CHUNK_TOKENS = 400
DEFAULT_TOP_K = 8


class AnsweringError(Exception):
    pass


class EmptyAnswer(AnsweringError):
    pass


class GraphParseError(AnsweringError):
    pass


@dataclass(frozen=True)
class FusedContext:
    """Unified text+graph context; rendering is canonical and deterministic."""

    question: str
    kg_block: str
    text_block: str
    docs: tuple[tuple[str, str], ...]  # (url, text), sorted by url

    @property
    def doc_urls(self) -> tuple[str, ...]:
        return tuple(url for url, _ in self.docs)


def render_kg_block(k_sub: KnowledgeGraph) -> str:
    lines = [
        f"{t.subject.id} — {t.predicate} — {t.object.id}" for t in k_sub.triples()
    ]
    return "\n".join(lines)


def render_text_block(docs: list[RetrievedDocument]) -> str:
    ordered = sorted(docs, key=lambda d: d.url)
    parts = [f"Source: {d.url}\n{d.text}" for d in ordered]
    return "\n\n".join(parts)


def fuse(
    question: str, docs: list[RetrievedDocument], k_sub: KnowledgeGraph
) -> FusedContext:
    """Merge retrieved documents and the subgraph into one canonical context."""
    ordered = sorted(docs, key=lambda d: d.url)
    return FusedContext(
        question=question,
        kg_block=render_kg_block(k_sub),
        text_block=render_text_block(docs),
        docs=tuple((d.url, d.text) for d in ordered),
    )


@dataclass
class Chunk:
    text: str
    vector: np.ndarray
    url: str


@dataclass
class EmbeddedContext:
    chunks: list[Chunk] = field(default_factory=list)
    dimension: int = DEFAULT_DIMENSION


def _token_bucket(token: str, dimension: int) -> tuple[int, float]:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    value = int.from_bytes(digest, "big")
    sign = 1.0 if value & 1 else -1.0
    return (value >> 1) % dimension, sign

Embedder = Callable[[str], np.ndarray]


def hash_embed(text: str, dimension: int = DEFAULT_DIMENSION) -> np.ndarray:
    """Feature-hash token unigrams into a fixed-size L2-normalized vector."""
    vec = np.zeros(dimension, dtype=np.float64)
    for token in tokenize(text):
        idx, sign = _token_bucket(token, dimension)
        vec[idx] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def _split_paragraphs(text: str) -> list[str]:
    parts = [p.strip() for p in text.split("\n\n")]
    return [p for p in parts if p]


def _pack_chunks(paragraphs: list[str], max_tokens: int) -> list[str]:
    """Greedy-pack consecutive paragraphs up to the token budget; oversize
    paragraphs are hard-split on token boundaries."""
    chunks: list[str] = []
    current: list[str] = []
    current_tokens = 0
    for para in paragraphs:
        count = len(para.split())
        if count > max_tokens:
            if current:
                chunks.append("\n\n".join(current))
                current, current_tokens = [], 0
            words = para.split()
            for i in range(0, len(words), max_tokens):
                chunks.append(" ".join(words[i : i + max_tokens]))
            continue
        if current and current_tokens + count > max_tokens:
            chunks.append("\n\n".join(current))
            current, current_tokens = [], 0
        current.append(para)
        current_tokens += count
    if current:
        chunks.append("\n\n".join(current))
    return chunks


def vectorize(
    fused: FusedContext,
    dimension: int = DEFAULT_DIMENSION,
    max_tokens: int = MAX_CHUNK_TOKENS,
    embedder: Embedder | None = None,
) -> EmbeddedContext:
    """Chunk the retrieved text per document and embed every chunk.

    The subgraph block is not chunked: it is already question-scoped and is
    passed whole to the generation prompt.
    """
    embed = embedder or (lambda text: hash_embed(text, dimension))
    context = EmbeddedContext(dimension=dimension)
    for url, body in fused.docs:
        for chunk_text in _pack_chunks(_split_paragraphs(body), max_tokens):
            context.chunks.append(
                Chunk(text=chunk_text, vector=embed(chunk_text), url=url)
            )
    return context


def rank_chunks(
    question_vector: np.ndarray, embedded: EmbeddedContext, top_k: int
) -> list[int]:
    """Indices of the k most similar chunks; ties broken by chunk index."""
    scored = [
        (float(np.dot(question_vector, chunk.vector)), i)
        for i, chunk in enumerate(embedded.chunks)
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [i for _, i in scored[:top_k]]


@dataclass
class Answer:
    text: str
    sources: list[str]
    removed_claims: list[str]
    question_id: str


REMOVED_MARKER = "REMOVED:"


def split_removed_section(content: str) -> tuple[str, list[str]]:
    lines = content.splitlines()
    marker_at = None
    for i, line in enumerate(lines):
        if line.strip() == REMOVED_MARKER or line.strip().startswith(REMOVED_MARKER):
            marker_at = i
    if marker_at is None:
        return content.strip(), []
    head = "\n".join(lines[:marker_at]).strip()
    tail_lines = []
    first = lines[marker_at].strip()[len(REMOVED_MARKER):].strip()
    if first:
        tail_lines.append(first)
    tail_lines.extend(ln.strip() for ln in lines[marker_at + 1 :])
    removed = [ln for ln in tail_lines if ln and ln.lower() != "none"]
    return head, removed


def generate_answer(
    question: str,
    fused: FusedContext,
    embedded: EmbeddedContext,
    gateway: Gateway,
    question_id: str,
    top_k: int = DEFAULT_TOP_K,
    embedder: Embedder | None = None,
) -> Answer:
    """Top-k chunk retrieval against the question, then the fusion prompt."""
    embed = embedder or (lambda text: hash_embed(text, embedded.dimension))
    question_vector = embed(question)
    selected = rank_chunks(question_vector, embedded, top_k)
    chunk_texts = []
    source_urls: list[str] = []
    for i in selected:
        chunk = embedded.chunks[i]
        chunk_texts.append(f"[{chunk.url}]\n{chunk.text}")
        if chunk.url not in source_urls:
            source_urls.append(chunk.url)
    response = gateway.ask(
        "fusion_answer",
        {
            "question": question,
            "KGData": fused.kg_block,
            "TextData": "\n\n".join(chunk_texts),
        },
    )
    text, removed = split_removed_section(response.content)
    if not text:
        raise EmptyAnswer(f"model returned a blank answer for {question_id}")
    return Answer(
        text=text,
        sources=source_urls,
        removed_claims=removed,
        question_id=question_id,
    )


def build_reasoning_graph(
    answer_text: str, gateway: Gateway
) -> tuple[ReasoningGraph, list[str]]:
    """Ask the model for the answer's node/edge explanation and parse it.

    One repair retry: the parse error is appended to the user turn so the
    model can correct its output.
    """
    request = gateway.request("graph_output", {"textAnswer": answer_text})
    response = gateway.complete(request)
    try:
        payload = parse_graph_payload(response.content)
    except PayloadUnparseable as first_error:
        retry_messages = list(request.messages)
        user = retry_messages[-1]
        retry_messages[-1] = type(user)(
            role=user.role,
            content=(
                f"{user.content}\n\nThe previous output could not be parsed: "
                f"{first_error.detail}. Provide only valid JSON."
            ),
        )
        retry = type(request)(
            template=request.template,
            messages=tuple(retry_messages),
            model=request.model,
            temperature=request.temperature,
        )
        retry_response = gateway.complete(retry)
        try:
            payload = parse_graph_payload(retry_response.content)
        except PayloadUnparseable as exc:
            raise GraphParseError(
                f"graph payload unparseable after retry: {exc.detail}"
            ) from exc
    return reasoning_graph_from_payload(payload)
