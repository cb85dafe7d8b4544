"""Source selection and text extraction.

The model picks relevant URLs from an indexed catalog; code enforces that
only catalog members survive. Content is fetched either from a bundled
corpus directory (one fixture file per URL) or live over HTTP, behind the
same interface, and reduced to plain text with headings and list items kept
as separate lines.
"""

from __future__ import annotations

import hashlib
import html.parser
import json
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import httpx

from .gateway import Gateway

logger = logging.getLogger(__name__)

_URLISH = re.compile(r"https?://\S+")


class RetrievalError(Exception):
    pass


class FetchError(RetrievalError):
    def __init__(self, url: str, cause: str):
        super().__init__(f"failed to fetch {url}: {cause}")
        self.url = url
        self.cause = cause


class AllSourcesFailed(RetrievalError):
    pass


class MalformedSelection(RetrievalError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    url: str
    title: str


@dataclass
class SourceCatalog:
    entries: list[CatalogEntry]

    def __post_init__(self):
        urls = [e.url for e in self.entries]
        if len(urls) != len(set(urls)):
            raise ValueError("catalog urls must be unique")
        if any(not u for u in urls):
            raise ValueError("catalog urls must be non-empty")

    def urls(self) -> list[str]:
        return [e.url for e in self.entries]

    @classmethod
    def load(cls, path: str) -> "SourceCatalog":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(entries=[CatalogEntry(e["url"], e.get("title", "")) for e in doc])


@dataclass
class RetrievedDocument:
    url: str
    text: str
    fetched_at: float
    fetch_latency: float
    warning: str | None = None


_BLOCK_TAGS = {
    "p", "div", "section", "article", "header", "footer", "main",
    "ul", "ol", "table", "blockquote", "h1", "h2", "h3", "h4", "h5", "h6",
}
_LINE_TAGS = {"li", "br", "tr", "title"}
_SKIP_TAGS = {"script", "style", "noscript"}


class _TextExtractor(html.parser.HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self._parts: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
        elif tag in _BLOCK_TAGS:
            self._parts.append("\n\n")
        elif tag in _LINE_TAGS:
            self._parts.append("\n")

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag in _BLOCK_TAGS:
            self._parts.append("\n\n")
        # Line tags break only on open so consecutive list items stay
        # adjacent lines of one block.

    def handle_data(self, data):
        if not self._skip_depth:
            self._parts.append(data)

    def text(self) -> str:
        raw = "".join(self._parts)
        lines = [re.sub(r"[ \t]+", " ", ln).strip() for ln in raw.split("\n")]
        out: list[str] = []
        blank = True
        for line in lines:
            if line:
                out.append(line)
                blank = False
            elif not blank:
                out.append("")
                blank = True
        while out and not out[-1]:
            out.pop()
        return "\n".join(out)


def extract_text(html_doc: str) -> str:
    """Strip tags and scripts; block elements become line breaks."""
    parser = _TextExtractor()
    parser.feed(html_doc)
    parser.close()
    return parser.text()


def url_fixture_name(url: str) -> str:
    return hashlib.sha256(url.encode("utf-8")).hexdigest()[:16] + ".html"


@dataclass
class RetrievalConfig:
    corpus_dir: str = ""
    live: bool = False
    max_workers: int = 4
    timeout: float = 30.0
    kg_slot: str = "knowledge_graph.json"
    codepath_slot: str = "sources/"
    temp_path_slot: str = "tmp/extracted/"


@dataclass
class SelectionResult:
    urls: list[str]
    latency: float
    warnings: list[str] = field(default_factory=list)


class SourceRetriever:
    def __init__(self, catalog: SourceCatalog, gateway: Gateway, config: RetrievalConfig):
        self.catalog = catalog
        self.gateway = gateway
        self.config = config

    def select_sources(self, question: str, kg_path: str | None = None) -> SelectionResult:
        """Ask the model for relevant links, then post-filter to the catalog."""
        if not self.catalog.entries:
            raise RetrievalError("catalog is empty")
        response = self.gateway.ask(
            "data_selection",
            {
                "question": question,
                "kgPath": kg_path or self.config.kg_slot,
                "listOfWeblink": ", ".join(self.catalog.urls()),
                "codepath": self.config.codepath_slot,
                "tempPath": self.config.temp_path_slot,
            },
        )
        warnings: list[str] = []
        tokens = [t.strip() for t in re.split(r"[,\s]+", response.content) if t.strip()]
        urlish = [t for t in tokens if _URLISH.match(t)]
        if tokens and not urlish:
            warnings.append(f"selection output contained no parseable url: {response.content[:80]!r}")
        known = set(self.catalog.urls())
        selected: list[str] = []
        for url in urlish:
            url = url.rstrip(",")
            if url not in known:
                warnings.append(f"dropped url not in catalog: {url}")
                continue
            if url not in selected:
                selected.append(url)
        return SelectionResult(urls=selected, latency=response.latency, warnings=warnings)

    def fetch_content(self, url: str) -> RetrievedDocument:
        started = time.perf_counter()
        if self.config.live:
            try:
                response = httpx.get(url, timeout=self.config.timeout, follow_redirects=True)
            except httpx.HTTPError as exc:
                raise FetchError(url, str(exc)) from exc
            if response.status_code != 200:
                raise FetchError(url, f"status {response.status_code}")
            raw = response.text
        else:
            path = os.path.join(self.config.corpus_dir, "sources", url_fixture_name(url))
            if not os.path.exists(path):
                raise FetchError(url, f"no corpus fixture at {path}")
            with open(path, "r", encoding="utf-8") as fh:
                raw = fh.read()
        text = extract_text(raw)
        warning = None
        if not text:
            warning = f"extraction produced empty text for {url}"
            logger.warning(warning)
        return RetrievedDocument(
            url=url,
            text=text,
            fetched_at=time.time(),
            fetch_latency=time.perf_counter() - started,
            warning=warning,
        )

    def retrieve_all(
        self, question: str, kg_path: str | None = None
    ) -> tuple[list[RetrievedDocument], SelectionResult]:
        """Select then fetch; per-document failures are recorded, not fatal.

        Documents come back deduplicated and sorted by url so downstream
        rendering is insertion-order independent.
        """
        selection = self.select_sources(question, kg_path)
        docs: dict[str, RetrievedDocument] = {}
        failures: list[str] = []

        def fetch(url: str) -> tuple[str, RetrievedDocument | None, str | None]:
            try:
                return url, self.fetch_content(url), None
            except FetchError as exc:
                return url, None, str(exc)

        if selection.urls:
            with ThreadPoolExecutor(max_workers=self.config.max_workers) as pool:
                for url, doc, error in pool.map(fetch, selection.urls):
                    if doc is not None:
                        docs[url] = doc
                    else:
                        failures.append(error)
        selection.warnings.extend(failures)
        if selection.urls and not docs:
            raise AllSourcesFailed(
                f"every fetch failed for question {question!r}: {failures}"
            )
        return [docs[u] for u in sorted(docs)], selection
