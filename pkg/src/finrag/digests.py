"""Content digests used for fixture keys and run metadata."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def text_digest(text: str) -> str:
    """SHA-256 hex digest of a text, the key for scripted/replay fixtures."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def config_digest(payload: dict) -> str:
    """Digest of a canonical JSON rendering; ties a run to its exact inputs."""
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
