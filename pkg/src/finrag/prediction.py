"""Post-processing of trend-prediction responses and accuracy scoring.

Direction extraction is keyword-based and bilingual: an up keyword anywhere
wins, otherwise a down keyword means down, otherwise the response is
invalid.  Latin keywords match on word boundaries (so "upper" is not "up");
CJK keywords match as substrings.  Invalid responses are excluded from the
chosen set and count as incorrect in accuracy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import InputError
from .months import validate_month

DIRECTIONS = ("up", "down", "invalid")

PROB_CATEGORIES = {
    "very large": "very_large",
    "large": "large",
    "medium to upper": "medium_to_upper",
    "average": "average",
}

_LATIN_TERM_RE = re.compile(r"^[a-z0-9 ]+$", re.IGNORECASE)


def _term_pattern(term: str) -> str:
    # Word-bound Latin terms; CJK has no word boundaries, so match verbatim.
    if _LATIN_TERM_RE.match(term):
        return rf"\b{re.escape(term)}\b"
    return re.escape(term)


@dataclass(frozen=True)
class DirectionLexicon:
    up_terms: tuple[str, ...] = ("up", "上涨")
    down_terms: tuple[str, ...] = ("down", "下跌")

    def _compile(self, terms: tuple[str, ...]) -> re.Pattern:
        return re.compile("|".join(_term_pattern(t) for t in terms), re.IGNORECASE)

    @property
    def up_pattern(self) -> re.Pattern:
        return self._compile(self.up_terms)

    @property
    def down_pattern(self) -> re.Pattern:
        return self._compile(self.down_terms)


DEFAULT_LEXICON = DirectionLexicon()


@dataclass(frozen=True)
class TrendPrediction:
    company_id: str
    month: str
    direction: str
    prob_category: str | None
    raw_response: str

    def __post_init__(self):
        validate_month(self.month)
        if self.direction not in DIRECTIONS:
            raise InputError(f"direction must be one of {DIRECTIONS}")
        if self.prob_category is not None and self.prob_category not in PROB_CATEGORIES.values():
            raise InputError(f"unknown prob_category {self.prob_category!r}")

    def to_json(self) -> dict:
        return {
            "company_id": self.company_id,
            "month": self.month,
            "direction": self.direction,
            "prob_category": self.prob_category,
            "raw_response": self.raw_response,
        }


@dataclass(frozen=True)
class ChosenSet:
    """Companies predicted "up" for one month; held long through it."""

    month: str
    company_ids: frozenset[str]


def parse_direction(response: str, lexicon: DirectionLexicon = DEFAULT_LEXICON) -> str:
    """Total function: up beats down when both occur; no keyword is invalid."""
    if lexicon.up_pattern.search(response):
        return "up"
    if lexicon.down_pattern.search(response):
        return "down"
    return "invalid"


_PROB_MARKER_RE = re.compile(r"probability", re.IGNORECASE)
_PROB_PHRASE_RE = re.compile(
    "|".join(rf"\b{re.escape(p)}\b" for p in PROB_CATEGORIES), re.IGNORECASE
)


def parse_probability(response: str) -> str | None:
    """First category phrase after a "probability" marker; None without one."""
    marker = _PROB_MARKER_RE.search(response)
    if marker is None:
        return None
    phrase = _PROB_PHRASE_RE.search(response, marker.end())
    if phrase is None:
        return None
    return PROB_CATEGORIES[phrase.group(0).lower()]


def parse_prediction(
    company_id: str,
    month: str,
    response: str,
    lexicon: DirectionLexicon = DEFAULT_LEXICON,
) -> TrendPrediction:
    return TrendPrediction(
        company_id=company_id,
        month=month,
        direction=parse_direction(response, lexicon),
        prob_category=parse_probability(response),
        raw_response=response,
    )


def select_chosen(predictions: Iterable[TrendPrediction], month: str) -> ChosenSet:
    """Exactly the companies predicted up in `month`; invalid is never chosen."""
    validate_month(month)
    seen: set[str] = set()
    chosen: set[str] = set()
    for prediction in predictions:
        if prediction.month != month:
            raise InputError(
                f"prediction for {prediction.company_id!r} is for month "
                f"{prediction.month}, expected {month}"
            )
        if prediction.company_id in seen:
            raise InputError(
                f"duplicate prediction for company {prediction.company_id!r} "
                f"in month {month}"
            )
        seen.add(prediction.company_id)
        if prediction.direction == "up":
            chosen.add(prediction.company_id)
    return ChosenSet(month=month, company_ids=frozenset(chosen))


def accuracy(
    predictions: Iterable[TrendPrediction],
    labels: Mapping[tuple[str, str], str],
) -> float:
    """Fraction of predictions matching their label; invalid counts as wrong."""
    predictions = list(predictions)
    if not predictions:
        return 0.0
    correct = 0
    for prediction in predictions:
        key = (prediction.company_id, prediction.month)
        if key not in labels:
            raise InputError(
                f"no label for company {prediction.company_id!r} in month "
                f"{prediction.month}"
            )
        if prediction.direction == labels[key]:
            correct += 1
    return correct / len(predictions)
