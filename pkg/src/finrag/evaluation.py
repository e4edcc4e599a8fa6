"""Response-quality measurement: ROUGE overlap scores, output statistics,
and pairwise preference judging.

ROUGE tokenization is bilingual by default: contiguous Latin alphanumeric
runs form one token (lowercased) and each CJK character is its own token.
Pairwise judging asks the judge twice with the response order swapped and
resolves conflicting verdicts to a tie, which cancels position bias.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import InputError, JudgeFormatError

ROUGE_VARIANTS = ("rouge1", "rouge2", "rougeL")

OUTCOMES = ("win", "tie", "lose")

_TOKEN_RE = re.compile(r"[a-z0-9]+|[\u3400-\u4dbf\u4e00-\u9fff]")


def tokenize(text: str) -> list[str]:
    """Latin alphanumeric runs as single lowercase tokens; CJK per character."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RougeScore:
    variant: str
    precision: float
    recall: float
    f1: float

    def __post_init__(self):
        if self.variant not in ROUGE_VARIANTS:
            raise InputError(f"variant must be one of {ROUGE_VARIANTS}")


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _lcs_length(xs: Sequence[str], ys: Sequence[str]) -> int:
    if not xs or not ys:
        return 0
    row = [0] * (len(ys) + 1)
    for x in xs:
        previous = 0
        for j, y in enumerate(ys, start=1):
            current = row[j]
            row[j] = previous + 1 if x == y else max(row[j], row[j - 1])
            previous = current
    return row[-1]


def rouge(
    candidate: str,
    reference: str,
    variant: str = "rouge1",
    tokenizer: Callable[[str], list[str]] = tokenize,
) -> RougeScore:
    """Clipped n-gram overlap for rouge1/rouge2, LCS for rougeL."""
    if variant not in ROUGE_VARIANTS:
        raise InputError(f"variant must be one of {ROUGE_VARIANTS}")
    if not reference:
        raise InputError("rouge reference must be non-empty")
    if not candidate:
        return RougeScore(variant, 0.0, 0.0, 0.0)

    cand_tokens = tokenizer(candidate)
    ref_tokens = tokenizer(reference)
    if variant == "rougeL":
        overlap = _lcs_length(cand_tokens, ref_tokens)
        cand_size, ref_size = len(cand_tokens), len(ref_tokens)
    else:
        n = 1 if variant == "rouge1" else 2
        cand_ngrams = _ngrams(cand_tokens, n)
        ref_ngrams = _ngrams(ref_tokens, n)
        overlap = sum(min(count, ref_ngrams[gram]) for gram, count in cand_ngrams.items())
        cand_size = sum(cand_ngrams.values())
        ref_size = sum(ref_ngrams.values())

    precision = overlap / cand_size if cand_size else 0.0
    recall = overlap / ref_size if ref_size else 0.0
    return RougeScore(variant, precision, recall, _f1(precision, recall))


def rouge_all(
    candidate: str,
    reference: str,
    tokenizer: Callable[[str], list[str]] = tokenize,
) -> dict[str, RougeScore]:
    return {v: rouge(candidate, reference, v, tokenizer) for v in ROUGE_VARIANTS}


def output_stats(responses: Iterable[tuple[str, str]]) -> dict[str, float]:
    """Mean output length in characters and the invalid-answer ratio."""
    responses = list(responses)
    if not responses:
        return {"avg_len": 0.0, "na_ratio": 0.0}
    total_len = sum(len(text) for text, _ in responses)
    invalid = sum(1 for _, direction in responses if direction == "invalid")
    return {"avg_len": total_len / len(responses), "na_ratio": invalid / len(responses)}


# --- pairwise preference ----------------------------------------------------


@dataclass(frozen=True)
class PreferenceVerdict:
    item_id: str
    outcome: str
    judge_id: str

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise InputError(f"outcome must be one of {OUTCOMES}")


JUDGE_PROMPT = (
    "You are judging two candidate answers to the same question. "
    "Decide which answer is better, or whether they are equally good.\n"
    "Question:\n{prompt}\n"
    "Response A:\n{a}\n"
    "Response B:\n{b}\n"
    'Reply with exactly one of: "A", "B", or "TIE".'
)

_VERDICT_RE = re.compile(r"\b(TIE|A|B)\b")


def _ask_judge(judge, prompt: str, first: str, second: str) -> str:
    raw = judge.complete(JUDGE_PROMPT.format(prompt=prompt, a=first, b=second))
    match = _VERDICT_RE.search(raw.upper())
    if match is None:
        raise JudgeFormatError(raw)
    return match.group(1)


def pairwise_judge(
    prompt: str,
    response_a: str,
    response_b: str,
    judge,
    item_id: str = "",
) -> PreferenceVerdict:
    """Judge a pair from the candidate (response_a) perspective.

    The pair is evaluated twice with the order swapped; verdicts that do not
    agree resolve to a tie.
    """
    first = _ask_judge(judge, prompt, response_a, response_b)
    second = _ask_judge(judge, prompt, response_b, response_a)
    forward = {"A": "win", "B": "lose", "TIE": "tie"}[first]
    backward = {"A": "lose", "B": "win", "TIE": "tie"}[second]
    outcome = forward if forward == backward else "tie"
    return PreferenceVerdict(item_id=item_id, outcome=outcome, judge_id=judge.id)


def aggregate_verdicts(verdicts: Iterable[PreferenceVerdict]) -> dict[str, float]:
    verdicts = list(verdicts)
    counts = Counter(v.outcome for v in verdicts)
    total = len(verdicts)
    return {
        "win": counts["win"],
        "tie": counts["tie"],
        "lose": counts["lose"],
        "win_rate": counts["win"] / total if total else 0.0,
    }
