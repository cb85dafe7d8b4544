"""Shared text helpers: tokenization, stopwords, stemming, sentence splitting."""

from __future__ import annotations

import re

_WS = re.compile(r"\s+")
_TOKEN = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")

STOPWORDS = frozenset(
    """
    a about after again against all also an and any are as at be been being
    before between both but by can could did do does doing down during each
    few for from further had has have having he her here hers him his how i
    if in into is it its itself just may me might more most must my no nor
    not of off on once only or other our ours out over own same she should
    so some such than that the their theirs them then there these they this
    those through to too under until up very was we were what when where
    which while who whom why will with would you your yours
    """.split()
)


def normalize_ws(text: str) -> str:
    """Collapse runs of whitespace to single spaces and trim the ends."""
    return _WS.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def content_words(text: str) -> list[str]:
    return [t for t in tokenize(text) if t not in STOPWORDS]


def stem(token: str) -> str:
    """Crude suffix stripping; just enough to match inflected forms."""
    if len(token) > 5 and token.endswith("ing"):
        return token[:-3]
    if len(token) > 4 and token.endswith("ed"):
        return token[:-2]
    if len(token) > 4 and token.endswith("es"):
        return token[:-2]
    if len(token) > 3 and token.endswith("s") and not token.endswith("ss"):
        return token[:-1]
    return token


def stemmed_content_words(text: str) -> list[str]:
    return [stem(t) for t in content_words(text)]


def sentences(text: str) -> list[str]:
    """Split text into sentences: newlines always break, then . ! ? do."""
    out: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        for part in _SENTENCE_SPLIT.split(line):
            part = part.strip()
            if part:
                out.append(part)
    return out


def fold(text: str) -> str:
    """Case- and whitespace-insensitive form used for substring checks."""
    return normalize_ws(text).lower()
