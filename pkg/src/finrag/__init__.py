"""finrag: retrieval-grounded stock trend prediction, monthly cap-weighted
backtesting with a full metric suite, and retrieval-augmented financial Q&A,
with all model and embedding calls behind pluggable offline-testable
backends."""

__version__ = "0.1.0"

from .backtest import (
    BacktestReport,
    EquityCurve,
    Portfolio,
    cap_weights,
    compute_metrics,
    export_equity_curve,
    run_strategy,
)
from .corpus import (
    AlignedSample,
    Company,
    Corpus,
    CorpusStats,
    KnowledgeDocument,
    PriceSeries,
    align_report_with_price,
    ingest_corpus,
    load_corpus,
    render_template,
    substitute,
)
from .dialogue import DialogueSession, SessionStore, respond
from .evaluation import (
    PreferenceVerdict,
    RougeScore,
    output_stats,
    pairwise_judge,
    rouge,
)
from .knowledge_store import (
    EmbeddingRecord,
    ExtractionUnit,
    HashingEmbedder,
    RetrievalHit,
    VectorIndex,
    embed,
    extract_qa_pairs,
    extract_summary,
)
from .model_gateway import (
    AssembledInput,
    ReplayChatBackend,
    ScriptedChatBackend,
    build_stage1_input,
    build_stage2_input,
    complete,
)
from .prediction import (
    ChosenSet,
    TrendPrediction,
    accuracy,
    parse_direction,
    parse_probability,
    select_chosen,
)
