"""Multi-turn Q&A orchestration: retrieve, assemble, complete, record.

Each respond call embeds the current query, retrieves the best-matching
knowledge unit, assembles the prompt with the session history, and runs the
chat backend.  Only delivered turns enter the history: a backend failure
propagates and records nothing.  If the index is empty the turn still goes
through with an explicit no-knowledge marker, so the system stays usable
during cold start.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyIndexError, InputError, NotFoundError
from .knowledge_store import Embedder, RetrievalHit, VectorIndex
from .model_gateway import DEFAULT_HISTORY_BUDGET, build_stage2_input, complete

NO_KNOWLEDGE_MARKER = "[no local knowledge found]"


@dataclass
class DialogueSession:
    """Ordered query/response history for one user."""

    session_id: str
    turns: list[tuple[str, str]] = field(default_factory=list)

    def append(self, query: str, response: str) -> None:
        self.turns.append((query, response))

    def clear(self) -> None:
        self.turns.clear()


def respond(
    session: DialogueSession,
    query: str,
    store: VectorIndex,
    backend,
    embedder: Embedder,
    k: int = 1,
    granularity: str | None = None,
    history_budget: int = DEFAULT_HISTORY_BUDGET,
    template: str | None = None,
) -> tuple[str, list[RetrievalHit]]:
    """One conversational turn; returns the response and the evidence hits."""
    if not query:
        raise InputError("query must be non-empty")
    try:
        hits = store.retrieve(query, k=k, embedder=embedder, granularity=granularity)
    except EmptyIndexError:
        hits = []
    knowledge = hits[0] if hits else NO_KNOWLEDGE_MARKER
    assembled = build_stage2_input(
        knowledge, session, query, template=template, history_budget=history_budget
    )
    response = complete(assembled, backend)
    session.append(query, response)
    return response, hits


class SessionStore:
    """Session registry with per-session mutual exclusion and optional
    line-delimited JSON transcript persistence."""

    def __init__(self, transcripts_dir: str | Path | None = None):
        self._sessions: dict[str, DialogueSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._transcripts_dir = Path(transcripts_dir) if transcripts_dir else None
        if self._transcripts_dir is not None and self._transcripts_dir.exists():
            for transcript in sorted(self._transcripts_dir.glob("*.jsonl")):
                session = DialogueSession(transcript.stem)
                for line in transcript.read_text(encoding="utf-8").splitlines():
                    if line.strip():
                        turn = json.loads(line)
                        session.append(turn["query"], turn["response"])
                self._sessions[session.session_id] = session

    def get_or_create(self, session_id: str) -> DialogueSession:
        if not session_id:
            raise InputError("session_id must be non-empty")
        with self._registry_lock:
            if session_id not in self._sessions:
                self._sessions[session_id] = DialogueSession(session_id)
            return self._sessions[session_id]

    def get(self, session_id: str) -> DialogueSession:
        with self._registry_lock:
            if session_id not in self._sessions:
                raise NotFoundError(f"unknown session {session_id!r}")
            return self._sessions[session_id]

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def reset(self, session_id: str) -> DialogueSession:
        """Clear a session's turns, preserving its id."""
        session = self.get(session_id)
        session.clear()
        if self._transcripts_dir is not None:
            transcript = self._transcripts_dir / f"{session_id}.jsonl"
            if transcript.exists():
                transcript.unlink()
        return session

    def session_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    def flush(self) -> None:
        """Persist every session transcript; called on service shutdown."""
        if self._transcripts_dir is None:
            return
        self._transcripts_dir.mkdir(parents=True, exist_ok=True)
        with self._registry_lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            transcript = self._transcripts_dir / f"{session.session_id}.jsonl"
            lines = [
                json.dumps({"query": q, "response": r}, ensure_ascii=False)
                for q, r in session.turns
            ]
            transcript.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
