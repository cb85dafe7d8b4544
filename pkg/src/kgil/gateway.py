"""Provider-agnostic chat-completion client with live / record / replay modes.

The prompt library lives here. Every pipeline stage goes through this module,
and replay mode resolves requests from on-disk fixtures keyed by a content
fingerprint, so the whole pipeline is deterministic under test without any
network access.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field
from typing import Callable

import httpx

MODES = ("live", "record", "replay")

DEFAULT_TIMEOUT = 60.0


class GatewayError(Exception):
    pass


class MissingSlot(GatewayError):
    def __init__(self, name: str):
        super().__init__(f"missing slot: {name}")
        self.name = name


class UnknownSlot(GatewayError):
    def __init__(self, name: str):
        super().__init__(f"unknown slot: {name}")
        self.name = name


class ProviderError(GatewayError):
    def __init__(self, status: int, body: str):
        super().__init__(f"provider returned {status}: {body[:200]}")
        self.status = status
        self.body = body


class GatewayTimeout(GatewayError):
    pass


class FixtureMiss(GatewayError):
    def __init__(self, template: str, fingerprint: str):
        super().__init__(
            f"no fixture for template {template!r} with fingerprint {fingerprint}"
        )
        self.template = template
        self.fingerprint = fingerprint


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" or "user"
    content: str


_SLOT = re.compile(r"<([A-Za-z][A-Za-z0-9_]*)>")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    system_body: str
    user_body: str

    @property
    def slots(self) -> frozenset[str]:
        return frozenset(_SLOT.findall(self.system_body) + _SLOT.findall(self.user_body))

    def render(self, slots: dict[str, str]) -> list[ChatMessage]:
        """Pure substitution. Every declared slot must be supplied, and no
        undeclared slot is accepted, so no marker survives rendering."""
        declared = self.slots
        for name in slots:
            if name not in declared:
                raise UnknownSlot(name)
        for name in declared:
            if name not in slots:
                raise MissingSlot(name)

        def fill(body: str) -> str:
            # Single-pass substitution so slot values are never re-scanned.
            return _SLOT.sub(lambda m: slots[m.group(1)], body)

        return [
            ChatMessage(role="system", content=fill(self.system_body)),
            ChatMessage(role="user", content=fill(self.user_body)),
        ]


FUSION_ANSWER_BODY = (
    "I have the following Knowledge Graph data and generated text data that "
    "related to medical conditions learned from the answers provided by the "
    "NHS website.\n"
    "\n"
    "Knowledge Graph data: <KGData>\n"
    "Text data: <TextData>\n"
    "\n"
    "Your task is to take the following query related to a medical condition "
    "as an input to extract useful information by parsing and reasoning "
    "through the Knowledge Graph triples to perform two tasks:\n"
    "1. Validate the text answers from Text data to remove inconsistent "
    "answers.\n"
    "2. Restructure the related triples as the text output to integrate with "
    "the validated Text Data to produce the final answer.\n"
    "\n"
    "Query: <question>"
)

# Output contract appended so removed statements are machine-readable.
FUSION_ANSWER_SUFFIX = (
    "\n\n"
    "After the final answer, output a line containing exactly \"REMOVED:\" "
    "followed by each removed inconsistent statement on its own line, or by "
    "the single line \"none\" if nothing was removed."
)

DATA_SELECTION_BODY = (
    "You are a web link search engine responsible for finding the most "
    "relevant web links from the provided list based on the user's query. "
    "Your process is guided by the following instructions:\n"
    "\n"
    "Link Relevance: Ensure that the links selected are directly related to "
    "the medical term or condition in the user's query. Include only links "
    "that provide precise and useful information.\n"
    "Pre-existing Knowledge: Leverage relevant knowledge from the Knowledge "
    "Graph repository, if available, to enhance the quality of link "
    "selection and ensure comprehensive coverage.\n"
    "Requirements: Provide the output as a single comma-separated string "
    "containing only URLs from the provided list. Strictly avoid any "
    "comments, human language, or further explanations.\n"
    "Your task is to carefully analyze the user query along with the "
    "pre-existing knowledge and identify only the validated web links from "
    "the provided list.\n"
    "\n"
    "Input Elements: Query: <question>,\n"
    "Knowledge Source: <kgPath>,\n"
    "List of Links: <listOfWeblink>.\n"
    "APIs web content query code path: <codepath>,"
)

DATA_SELECTION_USER = (
    "Here is the query: <question> Can you get all the related web URLs and "
    "extract the content from them to save at <tempPath>?"
)

GRAPH_FORMAT_BLOCK = (
    "Ensure the output follows this Python code format:\n"
    "nodes = []\n"
    "edges = []\n"
    "nodes.append(Node(id=\"Term1\", label=\"Description1\", size=25, "
    "shape=\"circularImage\"))\n"
    "nodes.append(Node(id=\"Term2\", label=\"Description2\", size=25, "
    "shape=\"circularImage\"))\n"
    "edges.append(Edge(source=\"Term1\", label=\"relation\", target=\"Term2\"))"
)

GRAPH_OUTPUT_BODY = (
    "I have the following text related to a medical condition. First "
    "summerise the keywords that present the condition names, symptome "
    "names, treatment names, prevention method names, diagnosing method "
    "names and who is at rick from the conditions. Then, create graph nodes "
    "and edges to represent the relationships between key medical terms "
    "that relation maximumly include [disease names, possible cause, "
    "symptoms, treatment, diagnosing, Preventing, Who's at risk] in a "
    "structured format. The nodes should only represent important medical "
    "terms without any descriptive or verb words and key concepts, and the "
    "edges should represent the relationships between them.\n"
    + GRAPH_FORMAT_BLOCK
    + "\n"
    "\n"
    "Text: <textAnswer>\n"
    "\n"
    "Provide the nodes and edges in a JSON formate that must be validated "
    "JSON file. Remember no further comments or explanations are needed to "
    "add to the file only the pure JSON data no any comments are needed."
)

GRAPH_UPDATE_BODY = (
    "I have the following text related to a medical condition. Create graph "
    "nodes and edges to represent the relationships between medical terms "
    "and key sentences in a structured format. The nodes should represent "
    "important medical terms and key concepts, and the edges should "
    "represent the relationships between them.\n"
    "\n"
    + GRAPH_FORMAT_BLOCK
    + "\n"
    "Text: <tempath>\n"
    "\n"
    "Provide the nodes and edges in the specified Python code format."
)

TRUTH_CHECK_BODY = (
    "You are an expert evaluator tasked with assessing the accuracy of an "
    "answer provided by an AI system. Your role is to evaluate the answer "
    "based on three criteria: accuracy, completeness, and the presence of "
    "incorrect information, using the ground truth provided. Your specific "
    "tasks are as follows:\n"
    "- Accuracy (30 points): Determine if the statements in the answer are "
    "properly referenced from the ground truth. Each statement must be "
    "traceable to the provided information.\n"
    "- Completeness (30 points): Evaluate whether the answer includes all "
    "the relevant key information present in the ground truth.\n"
    "- Inaccuracy Penalty (40 points): Identify any incorrect or unsupported "
    "statements. Each such statement will incur a significant penalty of up "
    "to 40 points.\n"
    "Carefully read the question, ground truth information, and the given "
    "answer. Identify any sentences in the answer that contain information "
    "not validated or incorrect according to the ground truth. Output these "
    "invalidated or incorrect sentences, each separated by \"::\".\n"
    "- Question: <question>\n"
    "- Ground truth: <groundTruth>\n"
    "- Answer: <answer>"
)

TEMPLATES: dict[str, PromptTemplate] = {
    "fusion_answer": PromptTemplate(
        name="fusion_answer",
        system_body=FUSION_ANSWER_BODY + FUSION_ANSWER_SUFFIX,
        user_body="Provide me the answer.",
    ),
    "data_selection": PromptTemplate(
        name="data_selection",
        system_body=DATA_SELECTION_BODY,
        user_body=DATA_SELECTION_USER,
    ),
    "graph_output": PromptTemplate(
        name="graph_output",
        system_body=GRAPH_OUTPUT_BODY,
        user_body="Provide me the graph notes.json file",
    ),
    "graph_update": PromptTemplate(
        name="graph_update",
        system_body=GRAPH_UPDATE_BODY,
        user_body="Provide me the graph",
    ),
    "truth_check": PromptTemplate(
        name="truth_check",
        system_body=TRUTH_CHECK_BODY,
        user_body="Provide me the invalidated sentences.",
    ),
}


def render_prompt(template_name: str, slots: dict[str, str]) -> list[ChatMessage]:
    if template_name not in TEMPLATES:
        raise KeyError(f"unknown template: {template_name}")
    return TEMPLATES[template_name].render(slots)


@dataclass(frozen=True)
class ChatRequest:
    template: str
    messages: tuple[ChatMessage, ...]
    model: str
    temperature: float = 0.0


@dataclass(frozen=True)
class ChatResponse:
    content: str
    latency: float
    provider: str


def fingerprint(request: ChatRequest) -> str:
    """Stable content hash over (template, rendered messages, model)."""
    payload = json.dumps(
        {
            "template": request.template,
            "model": request.model,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.messages
            ],
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class GatewayConfig:
    base_url: str = ""
    api_key: str = ""
    model: str = "demo-model"
    mode: str = "replay"
    fixture_dir: str = ""
    timeout: float = DEFAULT_TIMEOUT
    temperature: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @classmethod
    def from_env(cls, env: dict | None = None) -> "GatewayConfig":
        env = dict(os.environ if env is None else env)
        return cls(
            base_url=env.get("KGIL_LLM_BASE_URL", ""),
            api_key=env.get("KGIL_LLM_API_KEY", ""),
            model=env.get("KGIL_LLM_MODEL", "demo-model"),
            mode=env.get("KGIL_LLM_MODE", "replay"),
            fixture_dir=env.get("KGIL_FIXTURE_DIR", ""),
        )


# A transport takes the wire request body and returns the response content
# string plus a provider id. Injectable for tests and fixture generation.
Transport = Callable[[dict], tuple[str, str]]


class Gateway:
    """Chat-completion client. Stateless apart from the fixture store."""

    def __init__(self, config: GatewayConfig, transport: Transport | None = None):
        self.config = config
        self._transport = transport

    def request(self, template_name: str, slots: dict[str, str]) -> ChatRequest:
        messages = render_prompt(template_name, slots)
        return ChatRequest(
            template=template_name,
            messages=tuple(messages),
            model=self.config.model,
            temperature=self.config.temperature,
        )

    def _fixture_path(self, fp: str) -> str:
        return os.path.join(self.config.fixture_dir, f"{fp}.json")

    def _http_transport(self, body: dict) -> tuple[str, str]:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        try:
            response = httpx.post(
                url, json=body, headers=headers, timeout=self.config.timeout
            )
        except httpx.TimeoutException as exc:
            raise GatewayTimeout(str(exc)) from exc
        if response.status_code != 200:
            raise ProviderError(response.status_code, response.text)
        doc = response.json()
        try:
            content = doc["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(200, f"unexpected response shape: {doc}") from exc
        return content, doc.get("model", self.config.model)

    def _call(self, request: ChatRequest) -> ChatResponse:
        body = {
            "model": request.model,
            "temperature": request.temperature,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.messages
            ],
        }
        transport = self._transport or self._http_transport
        started = time.perf_counter()
        content, provider = transport(body)
        return ChatResponse(
            content=content,
            latency=time.perf_counter() - started,
            provider=provider,
        )

    def complete(self, request: ChatRequest) -> ChatResponse:
        mode = self.config.mode
        if mode == "replay":
            return self._replay(request)
        response = self._call(request)
        if mode == "record":
            self._record(request, response)
        return response

    def _replay(self, request: ChatRequest) -> ChatResponse:
        fp = fingerprint(request)
        path = self._fixture_path(fp)
        if not os.path.exists(path):
            raise FixtureMiss(request.template, fp)
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        resp = doc["response"]
        return ChatResponse(
            content=resp["content"],
            latency=float(resp.get("latency", 0.0)),
            provider=resp.get("provider", "replay"),
        )

    def _record(self, request: ChatRequest, response: ChatResponse) -> None:
        fp = fingerprint(request)
        os.makedirs(self.config.fixture_dir, exist_ok=True)
        doc = {
            "template": request.template,
            "fingerprint": fp,
            "request": {
                "model": request.model,
                "temperature": request.temperature,
                "messages": [
                    {"role": m.role, "content": m.content}
                    for m in request.messages
                ],
            },
            "response": {
                "content": response.content,
                "latency": response.latency,
                "provider": response.provider,
            },
        }
        path = self._fixture_path(fp)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        os.replace(tmp, path)

    def ask(self, template_name: str, slots: dict[str, str]) -> ChatResponse:
        return self.complete(self.request(template_name, slots))
