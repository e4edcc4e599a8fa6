"""Vector knowledge store: extraction, embedding, and exact cosine retrieval.

Knowledge is extracted at two granularities — a document-level summary whose
key text stands for the whole document, and question/answer pairs where the
question is the key and the answer the payload.  Both live in one index.

The index is an exact exhaustive scan: vectors are length-normalized at
insert and similarity is the dot product of normalized vectors, so rankings
are invariant to positive rescaling of stored vectors.  Upserts swap an
immutable snapshot under a lock, so any number of concurrent retrievals
observe either the pre- or post-upsert index, never a torn state.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .digests import text_digest
from .errors import (
    ConfigurationError,
    EmptyIndexError,
    ExtractionParseError,
    FixtureError,
    InputError,
    TransportError,
)

GRANULARITIES = ("summary", "qa_pair")

INDEX_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ExtractionUnit:
    """One extracted piece of knowledge: the key text that gets embedded,
    and the payload text handed to the model at answer time."""

    doc_id: str
    granularity: str
    key_text: str
    payload_text: str

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise InputError(f"granularity must be one of {GRANULARITIES}")
        if not self.key_text:
            raise InputError(f"extraction unit for {self.doc_id!r} has empty key_text")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.doc_id, self.granularity, self.key_text)


@dataclass(frozen=True)
class EmbeddingRecord:
    """A stored unit plus its raw embedding vector and Euclidean norm."""

    unit: ExtractionUnit
    vector: tuple[float, ...]
    norm: float

    def __post_init__(self):
        expected = math.sqrt(math.fsum(x * x for x in self.vector))
        if not math.isclose(self.norm, expected, rel_tol=1e-9, abs_tol=1e-12):
            raise InputError(
                f"record norm {self.norm} does not match vector length {expected}"
            )
        if not self.norm > 0:
            raise InputError("embedding vector must be nonzero")


@dataclass(frozen=True)
class RetrievalHit:
    record: EmbeddingRecord
    score: float


class Embedder(Protocol):
    id: str
    dimension: int

    def embed(self, text: str) -> list[float]: ...


class HashingEmbedder:
    """Deterministic stub embedder: unit-norm vector seeded by the text hash.

    Identical text always maps to an identical vector, on any platform.
    """

    def __init__(self, dimension: int = 64):
        if dimension < 1:
            raise ConfigurationError("embedder dimension must be >= 1")
        self.dimension = dimension
        self.id = f"hash-{dimension}"

    def embed(self, text: str) -> list[float]:
        if not text:
            raise InputError("cannot embed empty text")
        seed = int(text_digest(text)[:16], 16)
        rng = np.random.default_rng(seed)
        vec = rng.standard_normal(self.dimension)
        vec /= np.linalg.norm(vec)
        return [float(x) for x in vec]


class ReplayEmbedder:
    """Replays vectors recorded from a live embedding service.

    Fixture file: JSON {"id": str, "dimension": int, "vectors": {digest: [...]}}.
    """

    def __init__(self, path: str | Path):
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        self.id = payload["id"]
        self.dimension = int(payload["dimension"])
        self._vectors = payload["vectors"]

    def embed(self, text: str) -> list[float]:
        if not text:
            raise InputError("cannot embed empty text")
        digest = text_digest(text)
        if digest not in self._vectors:
            raise FixtureError(digest)
        return [float(x) for x in self._vectors[digest]]


def embed(text: str, embedder: Embedder) -> tuple[float, ...]:
    """Embed a text, checking the backend honors its declared dimension."""
    if not text:
        raise InputError("cannot embed empty text")
    vector = tuple(float(x) for x in embedder.embed(text))
    if len(vector) != embedder.dimension:
        raise ConfigurationError(
            f"embedder {embedder.id!r} returned dimension {len(vector)}, "
            f"declared {embedder.dimension}"
        )
    return vector


def embed_unit(unit: ExtractionUnit, embedder: Embedder) -> EmbeddingRecord:
    vector = embed(unit.key_text, embedder)
    norm = math.sqrt(math.fsum(x * x for x in vector))
    if norm == 0:
        raise InputError(f"embedding for {unit.doc_id!r} has zero norm")
    return EmbeddingRecord(unit=unit, vector=vector, norm=norm)


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    nu = math.sqrt(math.fsum(x * x for x in u))
    nv = math.sqrt(math.fsum(x * x for x in v))
    if nu == 0 or nv == 0:
        raise InputError("cosine similarity undefined for zero vectors")
    dot = math.fsum(a * b for a, b in zip(u, v))
    return max(-1.0, min(1.0, dot / (nu * nv)))


# --- extraction -----------------------------------------------------------


class Extractor(Protocol):
    id: str

    def extract(self, text: str) -> str: ...


class HeadExtractor:
    """Stub summarizer: the first n characters of the document."""

    def __init__(self, n: int = 200):
        if n < 1:
            raise ConfigurationError("head extractor needs n >= 1")
        self.n = n
        self.id = f"head-{n}"

    def extract(self, text: str) -> str:
        return text[: self.n]


class ScriptedExtractor:
    """Fixed mapping from input text (or its digest) to raw extractor output."""

    def __init__(self, responses: dict[str, str], id: str = "scripted-extractor"):
        self._responses = dict(responses)
        self.id = id

    def extract(self, text: str) -> str:
        if text in self._responses:
            return self._responses[text]
        digest = text_digest(text)
        if digest in self._responses:
            return self._responses[digest]
        raise FixtureError(digest)


class ReplayExtractor:
    """Replays recorded extractor exchanges from digest-keyed fixture files."""

    def __init__(self, directory: str | Path, id: str | None = None):
        self._directory = Path(directory)
        self.id = id or f"replay-{self._directory.name}"

    def extract(self, text: str) -> str:
        digest = text_digest(text)
        fixture = self._directory / f"{digest}.json"
        if not fixture.exists():
            raise FixtureError(digest)
        return json.loads(fixture.read_text(encoding="utf-8"))["output"]


def extract_summary(doc, extractor: Extractor) -> ExtractionUnit:
    """Document-level extraction: key = summary, payload = full body."""
    if not doc.body:
        raise InputError(f"document {doc.id!r} has an empty body")
    try:
        summary = extractor.extract(doc.body)
    except TransportError as exc:
        raise TransportError(f"summarizer failed for document {doc.id!r}: {exc}") from exc
    return ExtractionUnit(
        doc_id=doc.id, granularity="summary", key_text=summary, payload_text=doc.body
    )


def extract_qa_pairs(doc, extractor: Extractor) -> list[ExtractionUnit]:
    """Entity-level extraction: the backend emits a JSON array of
    {"question", "answer"} objects; the question is the key, the answer the
    payload.  An empty array is a valid result, not an error."""
    if not doc.body:
        raise InputError(f"document {doc.id!r} has an empty body")
    try:
        raw = extractor.extract(doc.body)
    except TransportError as exc:
        raise TransportError(f"qa extractor failed for document {doc.id!r}: {exc}") from exc
    try:
        pairs = json.loads(raw)
        if not isinstance(pairs, list):
            raise ValueError("expected a JSON array")
        units = []
        for pair in pairs:
            units.append(
                ExtractionUnit(
                    doc_id=doc.id,
                    granularity="qa_pair",
                    key_text=pair["question"],
                    payload_text=pair["answer"],
                )
            )
    except (ValueError, KeyError, TypeError) as exc:
        raise ExtractionParseError(
            f"malformed qa extractor output for document {doc.id!r}: {exc}", raw
        ) from exc
    return units


# --- index ----------------------------------------------------------------

_GRANULARITY_RANK = {"summary": 0, "qa_pair": 1}


@dataclass(frozen=True)
class _Snapshot:
    records: tuple[EmbeddingRecord, ...]
    matrix: np.ndarray  # row-normalized, aligned with records


def _build_snapshot(records: tuple[EmbeddingRecord, ...], dimension: int) -> _Snapshot:
    if records:
        matrix = np.array([r.vector for r in records], dtype=np.float64)
        matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    else:
        matrix = np.empty((0, dimension), dtype=np.float64)
    return _Snapshot(records=records, matrix=matrix)


class VectorIndex:
    """Exact exhaustive-scan cosine index over embedding records."""

    def __init__(self, dimension: int, embedder_id: str,
                 records: Iterable[EmbeddingRecord] = ()):
        if dimension < 1:
            raise ConfigurationError("index dimension must be >= 1")
        self.dimension = dimension
        self.embedder_id = embedder_id
        self._lock = threading.Lock()
        ordered: dict[tuple[str, str, str], EmbeddingRecord] = {}
        for record in records:
            self._check_dimension(record)
            ordered[record.unit.key] = record
        self._snapshot = _build_snapshot(self._canonical(ordered), dimension)

    @staticmethod
    def _canonical(by_key: dict) -> tuple[EmbeddingRecord, ...]:
        return tuple(
            by_key[key]
            for key in sorted(
                by_key, key=lambda k: (k[0], _GRANULARITY_RANK[k[1]], k[2])
            )
        )

    def _check_dimension(self, record: EmbeddingRecord) -> None:
        if len(record.vector) != self.dimension:
            raise ConfigurationError(
                f"record dimension {len(record.vector)} does not match index "
                f"dimension {self.dimension}"
            )

    def __len__(self) -> int:
        return len(self._snapshot.records)

    @property
    def records(self) -> tuple[EmbeddingRecord, ...]:
        return self._snapshot.records

    def upsert(self, record: EmbeddingRecord) -> None:
        """Insert or replace the record with the same (doc_id, granularity,
        key_text); concurrent retrievals keep reading the prior snapshot
        until the swap."""
        self._check_dimension(record)
        with self._lock:
            by_key = {r.unit.key: r for r in self._snapshot.records}
            by_key[record.unit.key] = record
            self._snapshot = _build_snapshot(self._canonical(by_key), self.dimension)

    def upsert_many(self, records: Iterable[EmbeddingRecord]) -> None:
        records = list(records)
        for record in records:
            self._check_dimension(record)
        with self._lock:
            by_key = {r.unit.key: r for r in self._snapshot.records}
            for record in records:
                by_key[record.unit.key] = record
            self._snapshot = _build_snapshot(self._canonical(by_key), self.dimension)

    def index_document_units(self, units: Iterable[ExtractionUnit], embedder: Embedder) -> int:
        if embedder.id != self.embedder_id:
            raise ConfigurationError(
                f"index was built with embedder {self.embedder_id!r}, got {embedder.id!r}"
            )
        records = [embed_unit(unit, embedder) for unit in units]
        self.upsert_many(records)
        return len(records)

    def retrieve(
        self,
        query: str,
        k: int = 1,
        embedder: Embedder | None = None,
        granularity: str | None = None,
        query_vector: Sequence[float] | None = None,
    ) -> list[RetrievalHit]:
        """Top-k records by cosine similarity to the query.

        Ties break by ascending doc_id, then summary before qa_pair, then
        key_text, so rankings are total and reproducible.
        """
        if k < 1:
            raise InputError(f"k must be >= 1, got {k}")
        if granularity is not None and granularity not in GRANULARITIES:
            raise InputError(f"granularity filter must be one of {GRANULARITIES}")
        snapshot = self._snapshot
        if not snapshot.records:
            raise EmptyIndexError("retrieval against an empty index")
        if query_vector is None:
            if embedder is None:
                raise InputError("retrieve needs an embedder or a query_vector")
            if embedder.id != self.embedder_id:
                raise ConfigurationError(
                    f"index was built with embedder {self.embedder_id!r}, "
                    f"got {embedder.id!r}"
                )
            query_vector = embed(query, embedder)
        q = np.asarray(query_vector, dtype=np.float64)
        if q.shape != (self.dimension,):
            raise ConfigurationError(
                f"query dimension {q.shape} does not match index dimension "
                f"{self.dimension}"
            )
        q_norm = np.linalg.norm(q)
        if q_norm == 0:
            raise InputError("query vector has zero norm")
        scores = snapshot.matrix @ (q / q_norm)
        scores = np.clip(scores, -1.0, 1.0)

        candidates = range(len(snapshot.records))
        if granularity is not None:
            candidates = [
                i for i in candidates
                if snapshot.records[i].unit.granularity == granularity
            ]
            if not candidates:
                return []
        ranked = sorted(
            candidates,
            key=lambda i: (
                -scores[i],
                snapshot.records[i].unit.doc_id,
                _GRANULARITY_RANK[snapshot.records[i].unit.granularity],
                snapshot.records[i].unit.key_text,
            ),
        )
        return [
            RetrievalHit(record=snapshot.records[i], score=float(scores[i]))
            for i in ranked[:k]
        ]

    # --- persistence ------------------------------------------------------

    def save(self, path: str | Path) -> Path:
        """Write the index as a JSON header line plus one record per line.

        Field order is fixed and records are sorted by key, so saving a
        loaded index reproduces the file byte for byte.
        """
        path = Path(path)
        snapshot = self._snapshot
        lines = [
            json.dumps(
                {
                    "format_version": INDEX_FORMAT_VERSION,
                    "dimension": self.dimension,
                    "count": len(snapshot.records),
                    "embedder_id": self.embedder_id,
                },
                ensure_ascii=False,
                separators=(",", ":"),
            )
        ]
        for record in snapshot.records:
            lines.append(
                json.dumps(
                    {
                        "doc_id": record.unit.doc_id,
                        "granularity": record.unit.granularity,
                        "key_text": record.unit.key_text,
                        "payload_text": record.unit.payload_text,
                        "vector": list(record.vector),
                        "norm": record.norm,
                    },
                    ensure_ascii=False,
                    separators=(",", ":"),
                )
            )
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        path = Path(path)
        if not path.exists():
            raise InputError(f"index file not found: {path}")
        with path.open(encoding="utf-8") as handle:
            header_line = handle.readline()
            try:
                header = json.loads(header_line)
            except json.JSONDecodeError as exc:
                raise InputError(f"corrupt index header in {path}") from exc
            if header.get("format_version") != INDEX_FORMAT_VERSION:
                raise ConfigurationError(
                    f"unsupported index format_version {header.get('format_version')!r}"
                )
            records = []
            for line in handle:
                if not line.strip():
                    continue
                raw = json.loads(line)
                records.append(
                    EmbeddingRecord(
                        unit=ExtractionUnit(
                            doc_id=raw["doc_id"],
                            granularity=raw["granularity"],
                            key_text=raw["key_text"],
                            payload_text=raw["payload_text"],
                        ),
                        vector=tuple(float(x) for x in raw["vector"]),
                        norm=float(raw["norm"]),
                    )
                )
        index = cls(int(header["dimension"]), header["embedder_id"], records)
        if len(index) != int(header["count"]):
            raise InputError(
                f"index {path} declares {header['count']} records, found {len(index)}"
            )
        return index
