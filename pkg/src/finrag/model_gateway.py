"""Uniform access to chat-completion backends and prompt assembly.

Three backend kinds share one interface: a remote HTTP service speaking a
single-endpoint JSON contract, a replay backend serving recorded exchanges
keyed by the digest of the input text, and scripted stubs for tests.
Scripted and replay backends are referentially transparent: identical input
always yields identical output.

Assembled inputs are a pure function of their arguments: ordered parts
(template, knowledge, history, query) joined by a single newline.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

import httpx

from .corpus import template_text
from .digests import text_digest
from .errors import FixtureError, InputError, TransportError

PART_SEPARATOR = "\n"

STAGES = ("one", "two")

PART_KINDS = ("template", "knowledge", "history", "query")

DEFAULT_HISTORY_BUDGET = 4_000


@dataclass(frozen=True)
class GenerationSettings:
    """Decoding request passed to remote backends; greedy mirrors the
    deterministic setting the pipeline assumes."""

    strategy: str = "greedy"
    max_new_tokens: int = 512

    def __post_init__(self):
        if self.max_new_tokens < 1:
            raise InputError("max_new_tokens must be >= 1")


@dataclass(frozen=True)
class PromptPart:
    kind: str
    text: str

    def __post_init__(self):
        if self.kind not in PART_KINDS:
            raise InputError(f"part kind must be one of {PART_KINDS}")


@dataclass(frozen=True)
class AssembledInput:
    stage: str
    text: str
    parts: tuple[PromptPart, ...]

    def __post_init__(self):
        if self.stage not in STAGES:
            raise InputError(f"stage must be one of {STAGES}")
        joined = PART_SEPARATOR.join(part.text for part in self.parts)
        if joined != self.text:
            raise InputError("assembled text must equal the concatenation of its parts")


def _assemble(stage: str, parts: list[PromptPart]) -> AssembledInput:
    text = PART_SEPARATOR.join(part.text for part in parts)
    return AssembledInput(stage=stage, text=text, parts=tuple(parts))


def build_stage1_input(company, docs, template: str | None = None) -> AssembledInput:
    """Trend-prediction input: instruction, then report bodies, then
    market-data bodies, in that order."""
    docs = list(docs)
    if not docs:
        raise InputError(f"no documents supplied for company {company.id!r}")
    reports = [d.body for d in docs if d.kind == "report"]
    market = [d.body for d in docs if d.kind == "market_data"]
    if not reports and not market:
        raise InputError(
            f"stage-1 input for company {company.id!r} needs at least one report "
            "or market_data document"
        )
    if template is None:
        template = template_text("trend_prompt").rstrip("\n")
    parts = [PromptPart("template", template)]
    if reports:
        parts.append(PromptPart("knowledge", PART_SEPARATOR.join(reports)))
    if market:
        parts.append(PromptPart("knowledge", PART_SEPARATOR.join(market)))
    return _assemble("one", parts)


def serialize_turn(query: str, response: str) -> str:
    return f"User: {query}{PART_SEPARATOR}Assistant: {response}"


def build_stage2_input(
    knowledge,
    history,
    query: str,
    template: str | None = None,
    history_budget: int = DEFAULT_HISTORY_BUDGET,
) -> AssembledInput:
    """Q&A input: instruction, retrieved knowledge, prior turns oldest first,
    then the query.

    `knowledge` may be a RetrievalHit or plain text.  History is truncated to
    `history_budget` characters by dropping oldest whole turns; the knowledge
    section and the query are never dropped.
    """
    if not query:
        raise InputError("query must be non-empty")
    if template is None:
        template = template_text("chat_prompt").rstrip("\n")
    knowledge_text = knowledge if isinstance(knowledge, str) else knowledge.record.unit.payload_text

    turns = list(getattr(history, "turns", history or ()))
    serialized = [serialize_turn(q, r) for q, r in turns]
    while serialized and sum(len(s) for s in serialized) > history_budget:
        serialized.pop(0)

    parts = [PromptPart("template", template), PromptPart("knowledge", knowledge_text)]
    parts.extend(PromptPart("history", turn) for turn in serialized)
    parts.append(PromptPart("query", query))
    return _assemble("two", parts)


# --- backends ---------------------------------------------------------------


class ScriptedChatBackend:
    """Deterministic stub: a fixed mapping from input text (or its digest)
    to the response."""

    kind = "scripted"

    def __init__(self, responses: Mapping[str, str], id: str = "scripted"):
        self._responses = dict(responses)
        self.id = id

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedChatBackend":
        path = Path(path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        responses = payload["responses"] if isinstance(payload, dict) and "responses" in payload else payload
        return cls(responses, id=f"scripted-{text_digest(path.read_text(encoding='utf-8'))[:8]}")

    def complete(self, text: str) -> str:
        if text in self._responses:
            return self._responses[text]
        digest = text_digest(text)
        if digest in self._responses:
            return self._responses[digest]
        raise FixtureError(digest)


class CallableChatBackend:
    """Scripted backend computed by a pure function of the input text."""

    kind = "scripted"

    def __init__(self, fn: Callable[[str], str], id: str = "callable"):
        self._fn = fn
        self.id = id

    def complete(self, text: str) -> str:
        return self._fn(text)


class ReplayChatBackend:
    """Replays recorded completions from a directory of digest-keyed files,
    each holding {"input": ..., "output": ...}."""

    kind = "replay"

    def __init__(self, directory: str | Path, id: str | None = None):
        self._directory = Path(directory)
        self.id = id or f"replay-{self._directory.name}"

    def complete(self, text: str) -> str:
        digest = text_digest(text)
        fixture = self._directory / f"{digest}.json"
        if not fixture.exists():
            raise FixtureError(digest)
        return json.loads(fixture.read_text(encoding="utf-8"))["output"]

    def record(self, text: str, output: str) -> Path:
        """Capture an exchange so later runs replay it byte-identically."""
        self._directory.mkdir(parents=True, exist_ok=True)
        fixture = self._directory / f"{text_digest(text)}.json"
        fixture.write_text(
            json.dumps({"input": text, "output": output}, ensure_ascii=False),
            encoding="utf-8",
        )
        return fixture


class RemoteChatBackend:
    """HTTP chat backend: POST {"input", "max_new_tokens", "temperature": 0}
    to one endpoint, read {"output"}.  Greedy decoding is requested via
    temperature 0; per-call timeout and bounded retry are part of the
    contract."""

    kind = "remote"

    def __init__(
        self,
        base_url: str,
        settings: GenerationSettings | None = None,
        timeout: float = 30.0,
        retries: int = 2,
        api_key: str | None = None,
        client: httpx.Client | None = None,
    ):
        self.base_url = base_url
        self.settings = settings or GenerationSettings()
        self.timeout = timeout
        self.retries = retries
        self.id = f"remote-{base_url}"
        headers = {}
        key = api_key if api_key is not None else os.environ.get("FINRAG_API_KEY")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = client or httpx.Client(timeout=timeout, headers=headers)

    def complete(self, text: str) -> str:
        payload = {
            "input": text,
            "max_new_tokens": self.settings.max_new_tokens,
            "temperature": 0,
        }
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                response = self._client.post(self.base_url, json=payload)
                response.raise_for_status()
                return response.json()["output"]
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_error = exc
        raise TransportError(
            f"remote backend {self.base_url} unreachable after "
            f"{self.retries + 1} attempts: {last_error}"
        )

    def healthcheck(self) -> bool:
        try:
            response = self._client.post(
                self.base_url,
                json={"input": "ping", "max_new_tokens": 1, "temperature": 0},
            )
            response.raise_for_status()
            return True
        except (httpx.TransportError, httpx.HTTPStatusError):
            return False


def complete(assembled: AssembledInput | str, backend) -> str:
    """Run one completion; scripted backends return exactly their mapping."""
    text = assembled.text if isinstance(assembled, AssembledInput) else assembled
    return backend.complete(text)
