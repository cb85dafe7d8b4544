"""Session pipeline: retrieval, subgraph fusion, generation, learning,
inference, and persistence, with per-stage timing.

Timing attribution: t_L covers source selection and fetching, t_A covers
answer generation and the answer explanation graph, t_R covers subgraph
extraction, knowledge extraction, merging, and inference. Persisting the
store is outside all three buckets; t_total is their exact sum.

In replay mode, triple timestamps come from a logical per-session clock so
consecutive runs from a clean state write byte-identical store files.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field

from . import answering, learning, store
from .answering import Answer, EmptyAnswer, FusedContext, GraphParseError
from .evaluation import TimingRecord
from .gateway import Gateway, GatewayConfig, GatewayError
from .graphs import ReasoningGraph, reasoning_graph_from_kg
from .retrieval import (
    AllSourcesFailed,
    RetrievalConfig,
    RetrievalError,
    SourceCatalog,
    SourceRetriever,
)
from .store import GraphSnapshotStats, KnowledgeGraph, MergeOutcome, Triple

logger = logging.getLogger(__name__)

# Triple timestamps in replay mode count up from here, one per session.
LOGICAL_EPOCH = 1735689600  # 2025-01-01T00:00:00Z


class OrchestratorError(Exception):
    pass


class RetrievalFailed(OrchestratorError):
    pass


class GenerationFailed(OrchestratorError):
    pass


class StoreError(OrchestratorError):
    pass


@dataclass(frozen=True)
class QuestionRecord:
    id: str
    text: str
    received_at: float

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("question text must be non-empty")


@dataclass
class SessionResult:
    question: QuestionRecord
    answer: Answer
    answer_reasoning: ReasoningGraph
    repository_reasoning_delta: list[Triple]
    kg_stats_before: GraphSnapshotStats
    kg_stats_after: GraphSnapshotStats
    timing: TimingRecord
    wall_clock: float
    warnings: list[str] = field(default_factory=list)

    def to_dict(self, include_timing: bool = True) -> dict:
        doc = {
            "question": {"id": self.question.id, "text": self.question.text},
            "answer": {
                "text": self.answer.text,
                "sources": self.answer.sources,
                "removed_claims": self.answer.removed_claims,
                "question_id": self.answer.question_id,
            },
            "answer_reasoning": self.answer_reasoning.to_dict(),
            "repository_reasoning_delta": [
                {
                    "s": t.subject.id,
                    "p": t.predicate,
                    "o": t.object.id,
                    "rule": t.provenance.ref,
                }
                for t in self.repository_reasoning_delta
            ],
            "kg_stats_before": vars(self.kg_stats_before).copy(),
            "kg_stats_after": vars(self.kg_stats_after).copy(),
            "warnings": list(self.warnings),
        }
        if include_timing:
            doc["timing"] = {
                "t_L": self.timing.t_l,
                "t_R": self.timing.t_r,
                "t_A": self.timing.t_a,
                "t_total": self.timing.t_total,
            }
            doc["wall_clock"] = self.wall_clock
        return doc


@dataclass
class EngineConfig:
    corpus_dir: str
    kg_path: str
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    hops: int = 2
    subgraph_cap: int = 200
    top_k: int = answering.DEFAULT_TOP_K
    dimension: int = answering.DEFAULT_DIMENSION
    checkpoint_indices: tuple[int, ...] = (1, 10, 20)
    merge_inferred: bool = False
    audit_path: str | None = None
    source_mode: str = "corpus"  # "corpus" reads bundled fixtures, "live" fetches HTTP

    @classmethod
    def from_env(cls, env: dict | None = None) -> "EngineConfig":
        env = dict(os.environ if env is None else env)
        data_dir = env.get("KGIL_DATA_DIR", "data")
        return cls(
            corpus_dir=env.get("KGIL_CORPUS_DIR", "fixtures/corpus"),
            kg_path=env.get("KGIL_KG_PATH", os.path.join(data_dir, "kg.json")),
            gateway=GatewayConfig.from_env(env),
            audit_path=os.path.join(data_dir, "audit.log"),
        )


class _StageTimer:
    def __init__(self):
        self.elapsed = 0.0

    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed += time.perf_counter() - self._start
        return False


class Engine:
    """One engine = one knowledge graph plus the agents that feed it."""

    def __init__(self, config: EngineConfig, transport=None):
        self.config = config
        self.gateway = Gateway(config.gateway, transport=transport)
        catalog_path = os.path.join(config.corpus_dir, "catalog.json")
        self.catalog = SourceCatalog.load(catalog_path)
        # Prompt slots describing storage locations stay logical names so
        # request fingerprints do not vary with the host filesystem.
        self.retriever = SourceRetriever(
            self.catalog,
            self.gateway,
            RetrievalConfig(
                corpus_dir=config.corpus_dir,
                live=config.source_mode == "live",
            ),
        )
        if os.path.exists(config.kg_path):
            self.graph = store.load(config.kg_path)
        else:
            self.graph = KnowledgeGraph()
        self._session_count = 0
        self.history: list[dict] = []

    def _next_timestamp(self) -> int:
        if self.config.gateway.mode == "replay":
            return LOGICAL_EPOCH + self._session_count
        return int(time.time())

    def _persist(self) -> None:
        try:
            store.save(self.graph, self.config.kg_path)
        except OSError as exc:
            raise StoreError(f"could not persist store: {exc}") from exc

    def ask(self, question_text: str, question_id: str | None = None) -> SessionResult:
        self._session_count += 1
        qid = question_id or f"q{self._session_count:03d}"
        question = QuestionRecord(
            id=qid, text=question_text, received_at=time.time()
        )
        created_at = self._next_timestamp()
        warnings: list[str] = []
        wall_start = time.perf_counter()
        t_l = _StageTimer()
        t_r = _StageTimer()
        t_a = _StageTimer()

        try:
            with t_l:
                docs, selection = self.retriever.retrieve_all(question_text)
            warnings.extend(selection.warnings)
        except (RetrievalError, GatewayError) as exc:
            raise RetrievalFailed(str(exc)) from exc

        with t_r:
            k_sub = self.graph.context_subgraph(
                question_text, hops=self.config.hops, cap=self.config.subgraph_cap
            )

        try:
            with t_a:
                fused = answering.fuse(question_text, docs, k_sub)
                embedded = answering.vectorize(fused, dimension=self.config.dimension)
                answer = answering.generate_answer(
                    question_text,
                    fused,
                    embedded,
                    self.gateway,
                    question_id=qid,
                    top_k=self.config.top_k,
                )
        except (EmptyAnswer, GatewayError) as exc:
            raise GenerationFailed(str(exc)) from exc

        stats_before = self.graph.stats()
        inferred_delta: list[Triple] = []
        with t_r:
            try:
                extraction = learning.extract_knowledge(
                    docs,
                    question_text,
                    self.gateway,
                    question_id=qid,
                    created_at=created_at,
                )
                warnings.extend(extraction.warnings)
                learning.learn(self.graph, extraction)
                inferred_delta = learning.infer(self.graph, created_at=created_at)
                if self.config.merge_inferred and inferred_delta:
                    self.graph.add_triples(inferred_delta)
            except (GatewayError, learning.LearningError, ValueError) as exc:
                # The answer already exists; learning problems degrade.
                warnings.append(f"learning failed: {exc}")
                logger.warning("learning failed for %s: %s", qid, exc)

        answer_reasoning = ReasoningGraph()
        with t_a:
            try:
                answer_reasoning, graph_warnings = answering.build_reasoning_graph(
                    answer.text, self.gateway
                )
                warnings.extend(graph_warnings)
            except (GraphParseError, GatewayError) as exc:
                warnings.append(f"answer reasoning graph failed: {exc}")
                logger.warning("reasoning graph failed for %s: %s", qid, exc)

        self._persist()
        stats_after = self.graph.stats()
        wall_clock = time.perf_counter() - wall_start
        timing = TimingRecord(t_l=t_l.elapsed, t_r=t_r.elapsed, t_a=t_a.elapsed)
        result = SessionResult(
            question=question,
            answer=answer,
            answer_reasoning=answer_reasoning,
            repository_reasoning_delta=inferred_delta,
            kg_stats_before=stats_before,
            kg_stats_after=stats_after,
            timing=timing,
            wall_clock=wall_clock,
            warnings=warnings,
        )
        self.history.append(
            {
                "index": self._session_count,
                "question_id": qid,
                "stats": stats_after,
                "timing": timing,
                "wall_clock": wall_clock,
            }
        )
        return result

    def get_graph(self, topic: str | None = None, hops: int = 2) -> ReasoningGraph:
        if topic:
            return reasoning_graph_from_kg(self.graph.subgraph({topic}, hops))
        return reasoning_graph_from_kg(self.graph)

    def get_causality(self, topic: str) -> ReasoningGraph:
        return learning.causal_subgraph(self.graph, topic)

    def post_knowledge(self, edges: list[dict], author: str) -> MergeOutcome:
        outcome = learning.add_human_knowledge(
            self.graph,
            edges,
            author,
            created_at=self._next_timestamp(),
            audit_path=self.config.audit_path,
        )
        if outcome.added:
            self._persist()
        return outcome

    def get_metrics(self) -> dict:
        from .evaluation import track_growth

        snapshots = [(h["index"], h["stats"]) for h in self.history]
        checkpoints = track_growth(snapshots, self.config.checkpoint_indices)
        return {
            "kg_stats": self.graph.stats(),
            "timing_history": [
                {
                    "index": h["index"],
                    "question_id": h["question_id"],
                    "timing": h["timing"],
                    "wall_clock": h["wall_clock"],
                }
                for h in self.history
            ],
            "growth_checkpoints": checkpoints,
        }
