"""Pipeline runners shared by the CLI and the HTTP service.

Both surfaces call these functions with identical inputs, so the artifacts
they produce are byte-identical.  Every writer is deterministic: stable
iteration order, canonical JSON (sorted keys, two-space indent, trailing
newline), no timestamps.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from . import backtest as bt
from .config import RunConfig, embedder_for_index_id
from .corpus import Company, PriceSeries, load_corpus, template_version
from .digests import config_digest, file_digest
from .errors import InputError
from .evaluation import aggregate_verdicts, pairwise_judge, rouge_all
from .figures import plot_equity_curves, plot_preference_counts
from .knowledge_store import (
    Embedder,
    Extractor,
    VectorIndex,
    extract_qa_pairs,
    extract_summary,
)
from .model_gateway import build_stage1_input, complete
from .months import validate_month
from .prediction import (
    TrendPrediction,
    parse_prediction,
    select_chosen,
    accuracy as prediction_accuracy,
)

STRATEGY_CURVE_NAME = "strategy"


def write_json(payload: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path


# --- ingest -----------------------------------------------------------------


def run_ingest(corpus_path: str | Path, out: str | Path | None = None) -> dict:
    stats = load_corpus(corpus_path).stats()
    payload = {
        "counts": stats.counts,
        "mean_input_chars": stats.mean_input_chars,
        "mean_label_chars": stats.mean_label_chars,
        "length_unit": stats.length_unit,
    }
    if out is not None:
        write_json(payload, out)
    return payload


# --- index ------------------------------------------------------------------


def run_index(
    corpus_path: str | Path,
    out: str | Path,
    embedder: Embedder,
    extractor: Extractor,
    granularity: str = "summary",
    seed: int = 0,
) -> dict:
    if granularity not in ("summary", "qa", "both"):
        raise InputError("granularity must be summary, qa, or both")
    corpus = load_corpus(corpus_path)
    index = VectorIndex(embedder.dimension, embedder.id)
    units = []
    for doc in corpus.documents:
        if granularity in ("summary", "both"):
            units.append(extract_summary(doc, extractor))
        if granularity in ("qa", "both"):
            units.extend(extract_qa_pairs(doc, extractor))
    index.index_document_units(units, embedder)
    index.save(out)
    return {
        "index": str(out),
        "count": len(index),
        "dimension": index.dimension,
        "embedder_id": index.embedder_id,
        "extractor_id": extractor.id,
        "granularity": granularity,
        "corpus_digest": file_digest(corpus_path),
        "seed": seed,
    }


# --- retrieve ---------------------------------------------------------------


def hit_to_json(hit) -> dict:
    return {
        "doc_id": hit.record.unit.doc_id,
        "granularity": hit.record.unit.granularity,
        "key_text": hit.record.unit.key_text,
        "payload": hit.record.unit.payload_text,
        "score": hit.score,
    }


def run_retrieve(
    index_path: str | Path,
    query: str,
    k: int = 1,
    embedder: Embedder | None = None,
    granularity: str | None = None,
) -> list[dict]:
    index = VectorIndex.load(index_path)
    if embedder is None:
        embedder = embedder_for_index_id(index.embedder_id)
    hits = index.retrieve(query, k=k, embedder=embedder, granularity=granularity)
    return [hit_to_json(hit) for hit in hits]


# --- predict ----------------------------------------------------------------


def run_predict(
    corpus_path: str | Path,
    out: str | Path,
    backend,
    months: tuple[str, str] | None = None,
    template: str | None = None,
    seed: int = 0,
) -> dict:
    """Stage-1 loop: for every company and month with at least one report,
    assemble the input from that month's documents (exact company-id join),
    complete it, and parse the response into a prediction row."""
    corpus = load_corpus(corpus_path)
    if months is not None:
        start, end = (validate_month(months[0]), validate_month(months[1]))

    targets = []
    for company_id in corpus.company_ids():
        report_months = {
            doc.month for doc in corpus.documents_for(company_id, kinds=("report",))
        }
        for month in sorted(report_months):
            if months is not None and not (start <= month <= end):
                continue
            targets.append((month, company_id))
    targets.sort()

    predictions = []
    for month, company_id in targets:
        docs = corpus.documents_for(
            company_id, month=month, kinds=("report", "market_data")
        )
        company = Company(company_id, company_id, 1.0)
        assembled = build_stage1_input(company, docs, template=template)
        response = complete(assembled, backend)
        predictions.append(parse_prediction(company_id, month, response))

    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(
        "".join(json.dumps(p.to_json(), ensure_ascii=False) + "\n" for p in predictions),
        encoding="utf-8",
    )
    meta = {
        "kind": "predictions",
        "corpus_digest": file_digest(corpus_path),
        "backend_id": backend.id,
        "template_version": template_version(),
        "months": list(months) if months else None,
        "count": len(predictions),
        "seed": seed,
    }
    meta["config_digest"] = config_digest(meta)
    write_json(meta, out.with_suffix(out.suffix + ".meta.json"))
    return meta


def load_predictions(path: str | Path) -> list[TrendPrediction]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"predictions file not found: {path}")
    predictions = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            predictions.append(
                TrendPrediction(
                    company_id=row["company_id"],
                    month=row["month"],
                    direction=row["direction"],
                    prob_category=row.get("prob_category"),
                    raw_response=row.get("raw_response", ""),
                )
            )
        except (json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"bad prediction row at line {line_no}: {exc}") from exc
    return predictions


# --- backtest -----------------------------------------------------------------


def load_price_file(path: str | Path) -> tuple[dict[str, Company], dict[str, PriceSeries]]:
    """Price file: one JSON object per line,
    {"company_id", "market_value", "prices": [{"month", "close"}, ...]}."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"price file not found: {path}")
    universe: dict[str, Company] = {}
    prices: dict[str, PriceSeries] = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            company_id = row["company_id"]
            universe[company_id] = Company(
                company_id, row.get("name", company_id), float(row["market_value"])
            )
            prices[company_id] = PriceSeries(
                company_id,
                tuple((p["month"], float(p["close"])) for p in row["prices"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"bad price row at line {line_no}: {exc}") from exc
    return universe, prices


def labels_from_prices(
    predictions: list[TrendPrediction], prices: Mapping[str, PriceSeries]
) -> dict[tuple[str, str], str]:
    labels: dict[tuple[str, str], str] = {}
    for prediction in predictions:
        key = (prediction.company_id, prediction.month)
        if prediction.company_id not in prices:
            raise InputError(f"no prices for company {prediction.company_id!r}")
        realized = prices[prediction.company_id].monthly_return(prediction.month)
        labels[key] = "up" if realized > 0 else "down"
    return labels


def _clip_curve(curve: bt.EquityCurve, months: tuple[str, ...]) -> bt.EquityCurve:
    """Restrict a curve to the given months, restarting accumulation there."""
    keep = set(months)
    clipped = [
        (m, r) for m, r in zip(curve.months, curve.monthly_returns) if m in keep
    ]
    return bt.EquityCurve.from_returns([m for m, _ in clipped], [r for _, r in clipped])


def backtest_metadata(
    predictions_path: str | Path,
    prices_path: str | Path,
    benchmark_path: str | Path | None,
    rf: float,
    months: tuple[str, str] | None = None,
) -> dict:
    """Content-addressed run metadata: identical inputs give identical ids."""
    metadata = {
        "predictions_digest": file_digest(predictions_path),
        "prices_digest": file_digest(prices_path),
        "benchmark_digest": file_digest(benchmark_path) if benchmark_path else None,
        "rf": rf,
        "months": list(months) if months else None,
    }
    metadata["config_digest"] = config_digest(metadata)
    metadata["run_id"] = metadata["config_digest"][:12]
    return metadata


def run_backtest(
    predictions_path: str | Path,
    prices_path: str | Path,
    benchmark_path: str | Path | None = None,
    rf: float = 0.0,
    months: tuple[str, str] | None = None,
    out: str | Path | None = None,
    curve_out: str | Path | None = None,
    fig_out: str | Path | None = None,
) -> dict:
    predictions = load_predictions(predictions_path)
    if months is not None:
        start, end = validate_month(months[0]), validate_month(months[1])
        predictions = [p for p in predictions if start <= p.month <= end]
    if not predictions:
        raise InputError(f"no predictions in {predictions_path} (window {months})")
    universe, prices = load_price_file(prices_path)

    by_month: dict[str, list[TrendPrediction]] = {}
    for prediction in predictions:
        by_month.setdefault(prediction.month, []).append(prediction)
    chosen = {
        month: select_chosen(rows, month) for month, rows in sorted(by_month.items())
    }
    curve = bt.run_strategy(chosen, universe, prices)

    labels = labels_from_prices(predictions, prices)
    acc = prediction_accuracy(predictions, labels)

    benchmark = None
    curves = {STRATEGY_CURVE_NAME: curve}
    if benchmark_path is not None:
        benchmark = bt.load_benchmark_curve(benchmark_path)
        if months is not None:
            benchmark = _clip_curve(benchmark, curve.months)
        if benchmark.months != curve.months:
            raise InputError("benchmark months do not align with the strategy curve")
        curves["benchmark"] = benchmark

    report = bt.compute_metrics(curve, benchmark=benchmark, acc=acc, rf=rf)
    metadata = backtest_metadata(predictions_path, prices_path, benchmark_path, rf, months)
    payload = bt.report_to_json(report, metadata=metadata)

    if out is not None:
        write_json(payload, out)
    if curve_out is not None:
        Path(curve_out).parent.mkdir(parents=True, exist_ok=True)
        bt.export_equity_curve(curves, curve_out)
    if fig_out is not None:
        Path(fig_out).parent.mkdir(parents=True, exist_ok=True)
        plot_equity_curves(curves, fig_out)
    return payload


# --- eval ---------------------------------------------------------------------


def run_eval(
    manifest_path: str | Path,
    out: str | Path | None = None,
    judge=None,
    fig_out: str | Path | None = None,
) -> dict:
    """Score an eval manifest: ROUGE against references where present, and
    pairwise preference where a second response and a judge are available."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise InputError(f"manifest not found: {manifest_path}")
    items = []
    for line_no, line in enumerate(manifest_path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            items.append(
                {
                    "item_id": str(row["item_id"]),
                    "prompt": row.get("prompt", ""),
                    "reference": row.get("reference"),
                    "response_a": row["response_a"],
                    "response_b": row.get("response_b"),
                }
            )
        except (json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"bad manifest row at line {line_no}: {exc}") from exc

    rows = []
    verdicts = []
    rouge_sums: dict[str, dict[str, float]] = {}
    rouge_count = 0
    for item in items:
        row: dict = {"item_id": item["item_id"]}
        if item["reference"]:
            scores = rouge_all(item["response_a"], item["reference"])
            row["rouge"] = {
                variant: {
                    "precision": score.precision,
                    "recall": score.recall,
                    "f1": score.f1,
                }
                for variant, score in scores.items()
            }
            rouge_count += 1
            for variant, score in scores.items():
                sums = rouge_sums.setdefault(
                    variant, {"precision": 0.0, "recall": 0.0, "f1": 0.0}
                )
                sums["precision"] += score.precision
                sums["recall"] += score.recall
                sums["f1"] += score.f1
        if item["response_b"] is not None and judge is not None:
            verdict = pairwise_judge(
                item["prompt"],
                item["response_a"],
                item["response_b"],
                judge,
                item_id=item["item_id"],
            )
            row["outcome"] = verdict.outcome
            verdicts.append(verdict)
        rows.append(row)

    aggregates: dict = {}
    if rouge_count:
        aggregates["rouge_mean"] = {
            variant: {part: value / rouge_count for part, value in sums.items()}
            for variant, sums in rouge_sums.items()
        }
    if verdicts:
        aggregates["preference"] = aggregate_verdicts(verdicts)
        aggregates["preference"]["judge_id"] = verdicts[0].judge_id

    payload = {"items": rows, "aggregates": aggregates}
    if out is not None:
        write_json(payload, out)
    if fig_out is not None and verdicts:
        plot_preference_counts(aggregates["preference"], fig_out)
    return payload


# --- scenarios (stored backtest input references) -----------------------------


def load_scenario(scenarios_dir: str | Path, scenario_id: str) -> dict:
    path = Path(scenarios_dir) / f"{scenario_id}.json"
    if not path.exists():
        raise InputError(f"unknown scenario {scenario_id!r}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    root = Path(scenarios_dir)
    resolved = {}
    for key in ("predictions_path", "prices_path", "benchmark_path"):
        if payload.get(key) is not None:
            candidate = Path(payload[key])
            resolved[key] = str(candidate if candidate.is_absolute() else root / candidate)
        else:
            resolved[key] = None
    resolved["rf"] = float(payload.get("rf", 0.0))
    return resolved
