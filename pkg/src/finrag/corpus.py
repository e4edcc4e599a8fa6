"""Corpus ingestion, report/price alignment, and prompt template rendering.

The corpus file is UTF-8 line-delimited JSON, one record per line:

    {"id": str, "kind": str, "body": str, "company_ids": [str],
     "published_at": "YYYY-MM-DD", "label": str?, "market_value": number?,
     "prices": [{"month": "YYYY-MM", "close": number}]?}

`market_value` and `prices` attach company metadata to the record's
company_ids; when repeated, the later record in file order wins.  Templates
are plain-text files with `<name>` placeholders, shipped inside the package
and overridable via a templates directory.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    CorpusFormatError,
    CoverageError,
    InputError,
    NotFoundError,
    TemplateBindingError,
    UnknownKindError,
)
from .months import month_of_date, next_month, validate_month

DOCUMENT_KINDS = ("report", "news", "market_data", "research", "stock_qa")
LABELS = ("up", "down")


@dataclass(frozen=True)
class Company:
    """A listed company with the market value used for portfolio weighting."""

    id: str
    name: str
    market_value: float

    def __post_init__(self):
        if not self.id:
            raise InputError("company id must be non-empty")
        if not self.market_value > 0:
            raise InputError(
                f"company {self.id!r} market_value must be > 0, got {self.market_value}"
            )


@dataclass(frozen=True)
class KnowledgeDocument:
    """One unit of financial knowledge (report, news, market data, QA...)."""

    id: str
    kind: str
    body: str
    company_ids: tuple[str, ...] = ()
    published_at: str = "1970-01-01"
    label: str | None = None

    def __post_init__(self):
        if self.kind not in DOCUMENT_KINDS:
            raise UnknownKindError(self.kind)
        if not self.body:
            raise InputError(f"document {self.id!r} has an empty body")
        month_of_date(self.published_at)  # validates parseability

    @property
    def month(self) -> str:
        return month_of_date(self.published_at)


@dataclass(frozen=True)
class PriceSeries:
    """Monthly closes for one company, strictly increasing by month."""

    company_id: str
    points: tuple[tuple[str, float], ...]

    def __post_init__(self):
        previous = None
        for month, close in self.points:
            validate_month(month)
            if previous is not None and month <= previous:
                raise InputError(
                    f"price series for {self.company_id!r} months not strictly "
                    f"increasing at {month}"
                )
            if not close > 0:
                raise InputError(
                    f"price series for {self.company_id!r} has non-positive close "
                    f"{close} in {month}"
                )
            previous = month

    def close(self, month: str) -> float | None:
        for m, c in self.points:
            if m == month:
                return c
        return None

    def monthly_return(self, month: str) -> float:
        """Simple return from holding through `month` into the next month."""
        start = self.close(month)
        if start is None:
            raise CoverageError(self.company_id, month)
        following = next_month(month)
        end = self.close(following)
        if end is None:
            raise CoverageError(self.company_id, following)
        return end / start - 1.0


@dataclass(frozen=True)
class AlignedSample:
    """A report aligned with the realized next-month price move."""

    document: KnowledgeDocument
    as_of_month: str
    label: str
    next_month_return: float

    def __post_init__(self):
        if self.label not in LABELS:
            raise InputError(f"label must be one of {LABELS}, got {self.label!r}")


@dataclass(frozen=True)
class CorpusStats:
    """Inventory of a loaded corpus: per-kind counts and mean text lengths.

    Lengths are character counts (`length_unit` records the convention).
    `mean_label_chars` averages over records that carry a label.
    """

    counts: dict[str, int]
    mean_input_chars: float
    mean_label_chars: float
    length_unit: str = "characters"


@dataclass(frozen=True)
class CorpusRecord:
    """A document plus the optional company metadata its source line carried."""

    document: KnowledgeDocument
    market_value: float | None = None
    prices: tuple[tuple[str, float], ...] | None = None

    def to_json(self) -> dict:
        doc = self.document
        record: dict = {
            "id": doc.id,
            "kind": doc.kind,
            "body": doc.body,
            "company_ids": list(doc.company_ids),
            "published_at": doc.published_at,
        }
        if doc.label is not None:
            record["label"] = doc.label
        if self.market_value is not None:
            record["market_value"] = self.market_value
        if self.prices is not None:
            record["prices"] = [{"month": m, "close": c} for m, c in self.prices]
        return record


class Corpus:
    """Immutable snapshot of loaded records; safe for concurrent readers."""

    def __init__(self, records: Iterable[CorpusRecord]):
        self._records = tuple(records)
        market_values: dict[str, float] = {}
        closes: dict[str, dict[str, float]] = {}
        for record in self._records:
            for company_id in record.document.company_ids:
                if record.market_value is not None:
                    market_values[company_id] = record.market_value
                if record.prices is not None:
                    per_month = closes.setdefault(company_id, {})
                    for month, close in record.prices:
                        per_month[month] = close
        self._market_values = market_values
        self._prices = {
            company_id: PriceSeries(company_id, tuple(sorted(per_month.items())))
            for company_id, per_month in closes.items()
        }

    @property
    def records(self) -> tuple[CorpusRecord, ...]:
        return self._records

    @property
    def documents(self) -> tuple[KnowledgeDocument, ...]:
        return tuple(record.document for record in self._records)

    def company_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for record in self._records:
            for company_id in record.document.company_ids:
                seen.setdefault(company_id)
        return sorted(seen)

    def company(self, company_id: str) -> Company:
        if company_id not in self._market_values:
            raise NotFoundError(f"no market value recorded for company {company_id!r}")
        return Company(company_id, company_id, self._market_values[company_id])

    def price_series(self, company_id: str) -> PriceSeries:
        if company_id not in self._prices:
            raise NotFoundError(f"no prices recorded for company {company_id!r}")
        return self._prices[company_id]

    def has_prices(self, company_id: str) -> bool:
        return company_id in self._prices

    def documents_for(
        self,
        company_id: str,
        month: str | None = None,
        kinds: tuple[str, ...] | None = None,
    ) -> list[KnowledgeDocument]:
        """Exact company-id join used by the stage-1 prediction loop."""
        out = []
        for doc in self.documents:
            if company_id not in doc.company_ids:
                continue
            if month is not None and doc.month != month:
                continue
            if kinds is not None and doc.kind not in kinds:
                continue
            out.append(doc)
        return out

    def stats(self) -> CorpusStats:
        counts = {kind: 0 for kind in DOCUMENT_KINDS}
        body_total = 0
        label_total = 0
        label_count = 0
        for doc in self.documents:
            counts[doc.kind] += 1
            body_total += len(doc.body)
            if doc.label is not None:
                label_total += len(doc.label)
                label_count += 1
        n = len(self._records)
        return CorpusStats(
            counts=counts,
            mean_input_chars=body_total / n if n else 0.0,
            mean_label_chars=label_total / label_count if label_count else 0.0,
        )

    def to_jsonl(self) -> str:
        """Lossless re-serialization: re-ingesting yields identical stats."""
        return "".join(
            json.dumps(record.to_json(), ensure_ascii=False) + "\n"
            for record in self._records
        )


def _parse_record(obj: dict, line_no: int) -> CorpusRecord:
    for field_name in ("id", "kind", "body", "company_ids", "published_at"):
        if field_name not in obj:
            raise CorpusFormatError(f"missing field {field_name!r}", line_no)
    kind = obj["kind"]
    if kind not in DOCUMENT_KINDS:
        raise UnknownKindError(str(kind), line_no)
    company_ids = obj["company_ids"]
    if not isinstance(company_ids, list) or not all(isinstance(c, str) for c in company_ids):
        raise CorpusFormatError("company_ids must be a list of strings", line_no)
    try:
        document = KnowledgeDocument(
            id=str(obj["id"]),
            kind=kind,
            body=obj["body"],
            company_ids=tuple(company_ids),
            published_at=obj["published_at"],
            label=obj.get("label"),
        )
    except UnknownKindError:
        raise
    except InputError as exc:
        raise CorpusFormatError(str(exc), line_no) from exc

    market_value = obj.get("market_value")
    if market_value is not None:
        if not isinstance(market_value, (int, float)) or not market_value > 0:
            raise CorpusFormatError(f"market_value must be > 0, got {market_value!r}", line_no)
        market_value = float(market_value)

    prices = None
    if obj.get("prices") is not None:
        raw_prices = obj["prices"]
        if not isinstance(raw_prices, list):
            raise CorpusFormatError("prices must be a list", line_no)
        points = []
        for point in raw_prices:
            try:
                points.append((validate_month(point["month"]), float(point["close"])))
            except (TypeError, KeyError, ValueError, InputError) as exc:
                raise CorpusFormatError(f"bad price point {point!r}", line_no) from exc
        prices = tuple(points)

    return CorpusRecord(document=document, market_value=market_value, prices=prices)


def parse_corpus_lines(lines: Iterable[str]) -> Corpus:
    records = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"invalid JSON ({exc.msg})", line_no) from exc
        if not isinstance(obj, dict):
            raise CorpusFormatError("record is not a JSON object", line_no)
        records.append(_parse_record(obj, line_no))
    return Corpus(records)


def load_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    if not path.exists():
        raise InputError(f"corpus file not found: {path}")
    with path.open(encoding="utf-8") as handle:
        return parse_corpus_lines(handle)


def ingest_corpus(path: str | Path) -> CorpusStats:
    """Load and validate a corpus file, returning its inventory stats."""
    return load_corpus(path).stats()


def align_report_with_price(report: KnowledgeDocument, prices: PriceSeries) -> AlignedSample:
    """Pair a report with the realized return over the following month.

    The label is "up" only for a strictly positive return; a flat month
    labels "down" (conservative for a long-only strategy).
    """
    if report.kind != "report":
        raise InputError(f"alignment requires a report document, got kind {report.kind!r}")
    month = report.month
    realized = prices.monthly_return(month)
    label = "up" if realized > 0 else "down"
    return AlignedSample(
        document=report, as_of_month=month, label=label, next_month_return=realized
    )


# --- templates ------------------------------------------------------------

_PLACEHOLDER_RE = re.compile(r"<([a-z][a-z0-9_]*)>")

TEMPLATE_IDS = (
    "trend_prompt",
    "chat_prompt",
    "question_generation",
    "report_labeling",
    "trend_analysis",
)


def _templates_root(templates_dir: str | Path | None):
    if templates_dir is not None:
        return Path(templates_dir)
    return resources.files(__package__) / "templates"


def template_version(templates_dir: str | Path | None = None) -> str:
    return (_templates_root(templates_dir) / "VERSION").read_text(encoding="utf-8").strip()


def template_text(template_id: str, templates_dir: str | Path | None = None) -> str:
    if template_id not in TEMPLATE_IDS and templates_dir is None:
        raise NotFoundError(f"unknown template id {template_id!r}")
    candidate = _templates_root(templates_dir) / f"{template_id}.txt"
    try:
        return candidate.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError) as exc:
        raise NotFoundError(f"template file not found: {template_id!r}") from exc


def substitute(template: str, bindings: Mapping[str, str]) -> str:
    """Replace `<name>` placeholders verbatim; single pass, nothing else altered."""

    def replace(match: re.Match) -> str:
        name = match.group(1)
        if name not in bindings:
            raise TemplateBindingError(name)
        return str(bindings[name])

    return _PLACEHOLDER_RE.sub(replace, template)


def render_template(
    template_id: str,
    bindings: Mapping[str, str],
    templates_dir: str | Path | None = None,
) -> str:
    return substitute(template_text(template_id, templates_dir), bindings)
