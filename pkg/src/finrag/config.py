"""Run configuration: backend specs, flag/env/file precedence, digests.

Backends are named by spec strings so every surface (CLI flag, environment
variable, config file, HTTP service) selects them the same way:

    model / judge:  scripted:<file.json> | replay:<dir> | remote:<url>
    embedder:       hash:<dim> | replay:<file.json>
    extractor:      head:<n> | scripted:<file.json> | replay:<dir>

Precedence is flags > environment (FINRAG_*) > config file > defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping

from .digests import config_digest
from .errors import ConfigurationError, InputError
from .knowledge_store import Embedder, HashingEmbedder, ReplayEmbedder
from .knowledge_store import Extractor, HeadExtractor, ReplayExtractor, ScriptedExtractor
from .model_gateway import (
    GenerationSettings,
    RemoteChatBackend,
    ReplayChatBackend,
    ScriptedChatBackend,
)

ENV_PREFIX = "FINRAG_"

_INT_FIELDS = {"k", "port", "seed", "history_budget", "max_new_tokens"}
_FLOAT_FIELDS = {"rf"}


@dataclass
class RunConfig:
    model: str | None = None
    judge: str | None = None
    embedder: str = "hash:64"
    extractor: str = "head:200"
    k: int = 1
    rf: float = 0.0
    corpus: str | None = None
    index: str | None = None
    port: int = 8000
    artifacts_dir: str | None = None
    sessions_dir: str | None = None
    scenarios_dir: str | None = None
    ui_dir: str | None = None
    seed: int = 0
    history_budget: int = 4000
    max_new_tokens: int = 512

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")

    def generation_settings(self) -> GenerationSettings:
        return GenerationSettings(max_new_tokens=self.max_new_tokens)

    def digest(self) -> str:
        payload = {f.name: getattr(self, f.name) for f in fields(self)}
        return config_digest(payload)


def _coerce(name: str, value):
    if value is None:
        return None
    if name in _INT_FIELDS:
        return int(value)
    if name in _FLOAT_FIELDS:
        return float(value)
    return value


def resolve_config(
    flags: Mapping[str, object] | None = None,
    env: Mapping[str, str] | None = None,
    config_path: str | Path | None = None,
) -> RunConfig:
    """Merge configuration sources: flags beat environment beat file."""
    merged: dict = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise InputError(f"config file not found: {path}")
        file_values = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(file_values, dict):
            raise InputError(f"config file must hold a JSON object: {path}")
        merged.update(file_values)
    env = os.environ if env is None else env
    known = {f.name for f in fields(RunConfig)}
    for name in known:
        env_value = env.get(f"{ENV_PREFIX}{name.upper()}")
        if env_value is not None:
            merged[name] = env_value
    for name, value in (flags or {}).items():
        if value is not None:
            merged[name] = value
    unknown = set(merged) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**{name: _coerce(name, value) for name, value in merged.items()})


def _split_spec(spec: str) -> tuple[str, str]:
    if ":" not in spec:
        raise ConfigurationError(
            f"backend spec must look like kind:ref, got {spec!r}"
        )
    kind, ref = spec.split(":", 1)
    return kind, ref


def chat_backend_from_spec(spec: str, settings: GenerationSettings | None = None):
    kind, ref = _split_spec(spec)
    if kind == "scripted":
        return ScriptedChatBackend.from_file(ref)
    if kind == "replay":
        return ReplayChatBackend(ref)
    if kind == "remote":
        return RemoteChatBackend(ref, settings=settings)
    raise ConfigurationError(f"unknown chat backend kind {kind!r}")


def embedder_from_spec(spec: str) -> Embedder:
    kind, ref = _split_spec(spec)
    if kind == "hash":
        return HashingEmbedder(int(ref))
    if kind == "replay":
        return ReplayEmbedder(ref)
    raise ConfigurationError(f"unknown embedder kind {kind!r}")


def embedder_for_index_id(embedder_id: str) -> Embedder:
    """Reconstruct the embedder an index was built with, when derivable."""
    if embedder_id.startswith("hash-"):
        return HashingEmbedder(int(embedder_id.split("-", 1)[1]))
    raise ConfigurationError(
        f"cannot reconstruct embedder {embedder_id!r}; pass --embedder explicitly"
    )


def extractor_from_spec(spec: str) -> Extractor:
    kind, ref = _split_spec(spec)
    if kind == "head":
        return HeadExtractor(int(ref))
    if kind == "scripted":
        payload = json.loads(Path(ref).read_text(encoding="utf-8"))
        responses = payload["responses"] if "responses" in payload else payload
        return ScriptedExtractor(responses)
    if kind == "replay":
        return ReplayExtractor(ref)
    raise ConfigurationError(f"unknown extractor kind {kind!r}")
