"""Deterministic end-to-end fixtures: a small corpus, prices, and scripted
backends, plus the analytically pre-summed expected results."""

from __future__ import annotations

import json
import random
from pathlib import Path

from finrag.corpus import Company, load_corpus
from finrag.digests import text_digest
from finrag.model_gateway import build_stage1_input
from finrag.months import next_month

COMPANIES = {"alpha": 100.0, "beta": 300.0, "gamma": 600.0}
REPORT_MONTHS = ["2021-01", "2021-02", "2021-03", "2021-04", "2021-05", "2021-06"]
PRICE_MONTHS = [*REPORT_MONTHS, "2021-07"]


def closes_for(company: str) -> dict[str, float]:
    rng = random.Random(f"prices:{company}")
    return {month: round(rng.uniform(50.0, 150.0), 2) for month in PRICE_MONTHS}


def corpus_rows() -> list[dict]:
    rows = []
    for company in sorted(COMPANIES):
        closes = closes_for(company)
        for month in REPORT_MONTHS:
            rows.append(
                {
                    "id": f"rep-{company}-{month}",
                    "kind": "report",
                    "body": f"{company} analyst report for {month}: fundamentals reviewed.",
                    "company_ids": [company],
                    "published_at": f"{month}-10",
                    "market_value": COMPANIES[company],
                }
            )
            rows.append(
                {
                    "id": f"mkt-{company}-{month}",
                    "kind": "market_data",
                    "body": f"{company} {month} close {closes[month]}",
                    "company_ids": [company],
                    "published_at": f"{month}-28",
                }
            )
    return rows


def price_rows() -> list[dict]:
    return [
        {
            "company_id": company,
            "market_value": COMPANIES[company],
            "prices": [
                {"month": month, "close": closes_for(company)[month]}
                for month in PRICE_MONTHS
            ],
        }
        for company in sorted(COMPANIES)
    ]


def label_for(company: str, month: str) -> str:
    closes = closes_for(company)
    return "up" if closes[next_month(month)] / closes[month] - 1.0 > 0 else "down"


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows),
        encoding="utf-8",
    )
    return path


def perfect_model_responses(corpus_path: Path) -> dict[str, str]:
    """Scripted mapping: every stage-1 input answers with its true label,
    dressed in the analysis output format."""
    corpus = load_corpus(corpus_path)
    responses: dict[str, str] = {}
    for company_id in corpus.company_ids():
        for month in REPORT_MONTHS:
            docs = corpus.documents_for(company_id, month=month, kinds=("report", "market_data"))
            assembled = build_stage1_input(Company(company_id, company_id, 1.0), docs)
            label = label_for(company_id, month)
            responses[text_digest(assembled.text)] = (
                f"Therefore, we predict the trend of the stock next month is {label}, "
                "probability: large"
            )
    return responses


def expected_equity_curve() -> tuple[list[str], list[float]]:
    """Pre-summed accumulated return of the perfect-oracle strategy, computed
    directly from the fixture arithmetic (no library code)."""
    ar_values = []
    running = 0.0
    for month in REPORT_MONTHS:
        chosen = [c for c in sorted(COMPANIES) if label_for(c, month) == "up"]
        monthly = 0.0
        if chosen:
            total_value = sum(COMPANIES[c] for c in chosen)
            for company in chosen:
                closes = closes_for(company)
                weight = COMPANIES[company] / total_value
                monthly += weight * (closes[next_month(month)] / closes[month] - 1.0)
        running += monthly
        ar_values.append(running)
    return list(REPORT_MONTHS), ar_values


def make_workspace(root: Path) -> dict[str, Path]:
    """Materialize corpus, prices, scripted-model fixture, and benchmark CSV."""
    corpus_path = write_jsonl(root / "corpus.jsonl", corpus_rows())
    prices_path = write_jsonl(root / "prices.jsonl", price_rows())
    model_path = root / "scripted_model.json"
    model_path.write_text(
        json.dumps({"responses": perfect_model_responses(corpus_path)}, indent=2),
        encoding="utf-8",
    )
    benchmark_path = root / "benchmark.csv"
    lines = ["month,benchmark"]
    running = 0.0
    for month in REPORT_MONTHS:
        running += 0.005
        lines.append(f"{month},{running:.10g}")
    benchmark_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {
        "corpus": corpus_path,
        "prices": prices_path,
        "model": model_path,
        "benchmark": benchmark_path,
    }
