"""HTTP service wrapping the engine.

Endpoints: POST /ask, GET /graph, GET /causality, POST /knowledge,
GET /metrics, GET /healthz. All bodies are JSON; pydantic models define the
wire schemas.
"""

from __future__ import annotations

from fastapi import FastAPI, Header, HTTPException
from pydantic import BaseModel, Field

from .learning import ValidationError
from .orchestrator import (
    Engine,
    EngineConfig,
    GenerationFailed,
    RetrievalFailed,
    SessionResult,
    StoreError,
)


class AskRequest(BaseModel):
    text: str = Field(min_length=1)


class NodeModel(BaseModel):
    id: str
    label: str


class EdgeModel(BaseModel):
    source: str
    label: str
    target: str


class GraphModel(BaseModel):
    nodes: list[NodeModel]
    edges: list[EdgeModel]


class StatsModel(BaseModel):
    term_count: int
    triple_count: int
    relation_type_count: int


class TimingModel(BaseModel):
    t_L: float
    t_R: float
    t_A: float
    t_total: float


class AnswerModel(BaseModel):
    text: str
    sources: list[str]
    removed_claims: list[str]
    question_id: str


class InferredTripleModel(BaseModel):
    s: str
    p: str
    o: str
    rule: str


class SessionResultModel(BaseModel):
    question_id: str
    question_text: str
    answer: AnswerModel
    answer_reasoning: GraphModel
    repository_reasoning_delta: list[InferredTripleModel]
    kg_stats_before: StatsModel
    kg_stats_after: StatsModel
    timing: TimingModel
    wall_clock: float
    warnings: list[str]


class KnowledgeRequest(BaseModel):
    edges: list[EdgeModel]
    author: str | None = None


class MergeOutcomeModel(BaseModel):
    added: int
    duplicates: int


class TimingRowModel(BaseModel):
    index: int
    question_id: str
    timing: TimingModel
    wall_clock: float


class CheckpointModel(BaseModel):
    index: int
    stats: StatsModel
    d_triples: int | None = None
    d_terms: int | None = None
    d_relation_types: int | None = None


class MetricsModel(BaseModel):
    kg_stats: StatsModel
    timing_history: list[TimingRowModel]
    growth_checkpoints: list[CheckpointModel]


def _graph_model(graph) -> GraphModel:
    doc = graph.to_dict()
    return GraphModel(
        nodes=[NodeModel(**n) for n in doc["nodes"]],
        edges=[EdgeModel(**e) for e in doc["edges"]],
    )


def _session_model(result: SessionResult) -> SessionResultModel:
    return SessionResultModel(
        question_id=result.question.id,
        question_text=result.question.text,
        answer=AnswerModel(
            text=result.answer.text,
            sources=result.answer.sources,
            removed_claims=result.answer.removed_claims,
            question_id=result.answer.question_id,
        ),
        answer_reasoning=_graph_model(result.answer_reasoning),
        repository_reasoning_delta=[
            InferredTripleModel(
                s=t.subject.id, p=t.predicate, o=t.object.id, rule=t.provenance.ref
            )
            for t in result.repository_reasoning_delta
        ],
        kg_stats_before=StatsModel(**vars(result.kg_stats_before)),
        kg_stats_after=StatsModel(**vars(result.kg_stats_after)),
        timing=TimingModel(
            t_L=result.timing.t_l,
            t_R=result.timing.t_r,
            t_A=result.timing.t_a,
            t_total=result.timing.t_total,
        ),
        wall_clock=result.wall_clock,
        warnings=result.warnings,
    )


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="kgil", version="0.1.0")
    app.state.engine = engine

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "kg_version": engine.graph.version}

    @app.post("/ask", response_model=SessionResultModel)
    def ask(request: AskRequest):
        try:
            result = engine.ask(request.text)
        except RetrievalFailed as exc:
            raise HTTPException(status_code=502, detail=f"retrieval failed: {exc}")
        except GenerationFailed as exc:
            raise HTTPException(status_code=502, detail=f"generation failed: {exc}")
        except StoreError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        return _session_model(result)

    @app.get("/graph", response_model=GraphModel)
    def graph(topic: str | None = None, hops: int = 2):
        if hops < 0:
            raise HTTPException(status_code=422, detail="hops must be >= 0")
        return _graph_model(engine.get_graph(topic, hops))

    @app.get("/causality", response_model=GraphModel)
    def causality(topic: str):
        return _graph_model(engine.get_causality(topic))

    @app.post("/knowledge", response_model=MergeOutcomeModel)
    def knowledge(
        request: KnowledgeRequest,
        x_author: str | None = Header(default=None, alias="X-Author"),
    ):
        author = request.author or x_author
        if not author:
            raise HTTPException(
                status_code=422, detail="author required (body field or X-Author header)"
            )
        try:
            outcome = engine.post_knowledge(
                [e.model_dump() for e in request.edges], author
            )
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=exc.problems)
        return MergeOutcomeModel(added=outcome.added, duplicates=outcome.duplicates)

    @app.get("/metrics", response_model=MetricsModel)
    def metrics():
        data = engine.get_metrics()
        checkpoints = []
        for index, stats, delta in data["growth_checkpoints"]:
            checkpoints.append(
                CheckpointModel(
                    index=index,
                    stats=StatsModel(**vars(stats)),
                    d_triples=delta.d_triples if delta else None,
                    d_terms=delta.d_terms if delta else None,
                    d_relation_types=delta.d_relation_types if delta else None,
                )
            )
        return MetricsModel(
            kg_stats=StatsModel(**vars(data["kg_stats"])),
            timing_history=[
                TimingRowModel(
                    index=h["index"],
                    question_id=h["question_id"],
                    timing=TimingModel(
                        t_L=h["timing"].t_l,
                        t_R=h["timing"].t_r,
                        t_A=h["timing"].t_a,
                        t_total=h["timing"].t_total,
                    ),
                    wall_clock=h["wall_clock"],
                )
                for h in data["timing_history"]
            ],
            growth_checkpoints=checkpoints,
        )

    return app


def app_from_env() -> FastAPI:
    """Entry point for `uvicorn kgil.service:app_from_env --factory`."""
    return create_app(Engine(EngineConfig.from_env()))
