"""Node/edge graph payloads: parsing model output and the explanation graph.

Two payload grammars are accepted from the model: a plain JSON document with
"nodes" and "edges" arrays, or the Python-constructor line format
(nodes.append(Node(...)) / edges.append(Edge(...))). Both normalize to the
same structure; every tolerance applied while parsing is surfaced as a
warning.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .store import KnowledgeGraph


class PayloadUnparseable(ValueError):
    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


@dataclass
class PayloadNode:
    id: str
    label: str = ""
    size: int | None = None
    shape: str | None = None


@dataclass
class PayloadEdge:
    source: str
    label: str
    target: str


@dataclass
class GraphPayload:
    nodes: list[PayloadNode] = field(default_factory=list)
    edges: list[PayloadEdge] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


_CODE_FENCE = re.compile(r"^\s*```[a-zA-Z0-9]*\s*\n(.*?)\n\s*```\s*$", re.DOTALL)
_NODE_LINE = re.compile(r"nodes\.append\(\s*Node\((.*?)\)\s*\)")
_EDGE_LINE = re.compile(r"edges\.append\(\s*Edge\((.*?)\)\s*\)")
_KWARG = re.compile(r"(\w+)\s*=\s*(\"(?:[^\"\\]|\\.)*\"|'(?:[^'\\]|\\.)*'|[-\w.]+)")


def _parse_kwargs(arglist: str) -> dict[str, str]:
    out = {}
    for name, value in _KWARG.findall(arglist):
        if value and value[0] in "\"'":
            value = value[1:-1]
        out[name] = value
    return out


def _from_json_doc(doc: dict) -> GraphPayload:
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise PayloadUnparseable("JSON document lacks nodes/edges arrays")
    payload = GraphPayload()
    for i, n in enumerate(doc["nodes"]):
        if not isinstance(n, dict) or "id" not in n:
            raise PayloadUnparseable(f"nodes[{i}] has no id")
        payload.nodes.append(
            PayloadNode(
                id=str(n["id"]),
                label=str(n.get("label", n["id"])),
                size=n.get("size"),
                shape=n.get("shape"),
            )
        )
    for i, e in enumerate(doc["edges"]):
        if not isinstance(e, dict) or not {"source", "label", "target"} <= e.keys():
            raise PayloadUnparseable(f"edges[{i}] lacks source/label/target")
        payload.edges.append(
            PayloadEdge(str(e["source"]), str(e["label"]), str(e["target"]))
        )
    return payload


def _from_constructor_lines(raw: str) -> GraphPayload:
    node_matches = _NODE_LINE.findall(raw)
    edge_matches = _EDGE_LINE.findall(raw)
    if not node_matches and not edge_matches:
        raise PayloadUnparseable("no constructor lines found")
    payload = GraphPayload()
    for args in node_matches:
        kw = _parse_kwargs(args)
        if "id" not in kw:
            raise PayloadUnparseable(f"Node(...) without id: {args!r}")
        size = kw.get("size")
        payload.nodes.append(
            PayloadNode(
                id=kw["id"],
                label=kw.get("label", kw["id"]),
                size=int(size) if size and size.isdigit() else None,
                shape=kw.get("shape"),
            )
        )
    for args in edge_matches:
        kw = _parse_kwargs(args)
        if not {"source", "label", "target"} <= kw.keys():
            raise PayloadUnparseable(f"Edge(...) lacks source/label/target: {args!r}")
        payload.edges.append(PayloadEdge(kw["source"], kw["label"], kw["target"]))
    return payload


def parse_graph_payload(raw: str) -> GraphPayload:
    """Parse model graph output; tolerates code fences and constructor lines."""
    text = raw.strip()
    warnings = []
    fence = _CODE_FENCE.match(text)
    if fence:
        text = fence.group(1).strip()
        warnings.append("stripped code-fence wrapper")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if doc is not None:
        payload = _from_json_doc(doc)
        payload.warnings.extend(warnings)
        return payload
    try:
        payload = _from_constructor_lines(text)
    except PayloadUnparseable as exc:
        raise PayloadUnparseable(
            f"neither JSON nor constructor format matched: {exc.detail}"
        ) from exc
    payload.warnings.extend(warnings)
    payload.warnings.append("constructor-format fallback")
    return payload


@dataclass(frozen=True)
class GraphNode:
    id: str
    label: str


@dataclass(frozen=True)
class GraphEdge:
    source: str
    label: str
    target: str


@dataclass
class ReasoningGraph:
    """Explanation graph handed to clients: unique nodes, resolved edges."""

    nodes: list[GraphNode] = field(default_factory=list)
    edges: list[GraphEdge] = field(default_factory=list)

    def node_ids(self) -> set[str]:
        return {n.id for n in self.nodes}

    def validate(self) -> None:
        ids = [n.id for n in self.nodes]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate node ids")
        known = set(ids)
        for e in self.edges:
            if e.source not in known or e.target not in known:
                raise ValueError(f"dangling edge {e.source} -> {e.target}")

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n.id, "label": n.label} for n in self.nodes],
            "edges": [
                {"source": e.source, "label": e.label, "target": e.target}
                for e in self.edges
            ],
        }


def reasoning_graph_from_payload(
    payload: GraphPayload,
) -> tuple[ReasoningGraph, list[str]]:
    """Build a valid ReasoningGraph; missing edge endpoints are auto-added."""
    warnings = list(payload.warnings)
    graph = ReasoningGraph()
    seen: set[str] = set()
    for n in payload.nodes:
        if n.id in seen:
            warnings.append(f"duplicate node id dropped: {n.id}")
            continue
        seen.add(n.id)
        graph.nodes.append(GraphNode(id=n.id, label=n.label or n.id))
    for e in payload.edges:
        for endpoint in (e.source, e.target):
            if endpoint not in seen:
                seen.add(endpoint)
                graph.nodes.append(GraphNode(id=endpoint, label=endpoint))
                warnings.append(f"auto-added missing node: {endpoint}")
        graph.edges.append(GraphEdge(source=e.source, label=e.label, target=e.target))
    graph.validate()
    return graph, warnings


def reasoning_graph_from_kg(graph: KnowledgeGraph) -> ReasoningGraph:
    """Render a knowledge (sub)graph as nodes/edges in deterministic order."""
    result = ReasoningGraph()
    for term in graph.terms():
        result.nodes.append(GraphNode(id=term.id, label=term.display_label))
    for triple in graph.triples():
        result.edges.append(
            GraphEdge(
                source=triple.subject.id,
                label=triple.predicate,
                target=triple.object.id,
            )
        )
    result.validate()
    return result
