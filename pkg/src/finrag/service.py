"""HTTP API hosting the interactive Q&A stage and on-demand backtests.

The service is a thin adapter over the same pipeline functions the CLI
uses, so artifacts produced through either surface are byte-identical for
identical inputs.
"""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import pipeline
from .config import RunConfig, chat_backend_from_spec, embedder_for_index_id, embedder_from_spec
from .dialogue import SessionStore, respond
from .errors import FinragError, InputError, NotFoundError
from .knowledge_store import VectorIndex


class ChatRequest(BaseModel):
    session_id: str
    query: str


class ResetRequest(BaseModel):
    session_id: str


class BacktestRequest(BaseModel):
    scenario: str | None = None
    predictions_path: str | None = None
    prices_path: str | None = None
    benchmark_path: str | None = None
    rf: float | None = None
    from_month: str | None = None
    to_month: str | None = None


def create_app(config: RunConfig) -> FastAPI:
    if config.index is None:
        raise InputError("serve needs an index path")
    index_path = Path(config.index)
    if not index_path.exists():
        raise InputError(f"index file not found: {index_path}")
    if config.model is None:
        raise InputError("serve needs a model backend spec")

    index = VectorIndex.load(index_path)
    embedder = embedder_from_spec(config.embedder)
    if embedder.id != index.embedder_id:
        embedder = embedder_for_index_id(index.embedder_id)
    backend = chat_backend_from_spec(config.model, config.generation_settings())
    sessions = SessionStore(transcripts_dir=config.sessions_dir)
    artifacts_dir = Path(config.artifacts_dir) if config.artifacts_dir else None
    backtest_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(_app):
        yield
        sessions.flush()  # graceful shutdown persists transcripts

    app = FastAPI(title="finrag", version="0.1.0", lifespan=lifespan)

    @app.exception_handler(FinragError)
    async def _finrag_error(request, exc: FinragError):
        status = 404 if isinstance(exc, NotFoundError) else 400
        from fastapi.responses import JSONResponse

        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/api/health")
    def health() -> dict:
        model_ok = True
        if hasattr(backend, "healthcheck"):
            model_ok = bool(backend.healthcheck())
        status = "ok" if model_ok else "degraded"
        return {
            "status": status,
            "index_count": len(index),
            "backends": {"model": backend.id, "embedder": embedder.id},
        }

    @app.post("/api/chat")
    def chat(request: ChatRequest) -> dict:
        session = sessions.get_or_create(request.session_id)
        with sessions.lock_for(request.session_id):
            response, hits = respond(
                session,
                request.query,
                index,
                backend,
                embedder,
                k=config.k,
                history_budget=config.history_budget,
            )
            return {
                "response": response,
                "evidence": [pipeline.hit_to_json(hit) for hit in hits],
                "turn": len(session.turns),
            }

    @app.post("/api/session/reset")
    def reset(request: ResetRequest) -> dict:
        session = sessions.reset(request.session_id)
        return {"session_id": session.session_id, "turns": len(session.turns)}

    @app.get("/api/session")
    def session_transcript(session_id: str) -> dict:
        session = sessions.get(session_id)
        return {
            "session_id": session.session_id,
            "turns": [{"query": q, "response": r} for q, r in session.turns],
        }

    @app.get("/api/retrieve")
    def retrieve(q: str, k: int = 1, granularity: str | None = None) -> dict:
        hits = index.retrieve(q, k=k, embedder=embedder, granularity=granularity)
        return {"hits": [pipeline.hit_to_json(hit) for hit in hits]}

    @app.post("/api/backtest")
    def backtest(request: BacktestRequest) -> dict:
        if request.scenario is not None:
            if config.scenarios_dir is None:
                raise InputError("no scenarios directory configured")
            refs = pipeline.load_scenario(config.scenarios_dir, request.scenario)
        else:
            refs = {
                "predictions_path": request.predictions_path,
                "prices_path": request.prices_path,
                "benchmark_path": request.benchmark_path,
                "rf": request.rf if request.rf is not None else config.rf,
            }
        if not refs.get("predictions_path") or not refs.get("prices_path"):
            raise InputError("backtest needs predictions_path and prices_path")
        rf = refs["rf"] if request.rf is None else request.rf
        months = None
        if request.from_month or request.to_month:
            if not (request.from_month and request.to_month):
                raise InputError("from_month and to_month must be given together")
            months = (request.from_month, request.to_month)

        with backtest_lock:
            out = curve_out = fig_out = None
            if artifacts_dir is not None:
                # Artifacts land under the content-derived run id, so
                # re-running identical inputs is idempotent.
                metadata = pipeline.backtest_metadata(
                    refs["predictions_path"], refs["prices_path"],
                    refs["benchmark_path"], rf, months,
                )
                run_dir = artifacts_dir / metadata["run_id"]
                out = run_dir / "report.json"
                curve_out = run_dir / "equity_curve.csv"
                fig_out = run_dir / "equity_curve.png"
            payload = pipeline.run_backtest(
                refs["predictions_path"], refs["prices_path"],
                benchmark_path=refs["benchmark_path"], rf=rf, months=months,
                out=out, curve_out=curve_out, fig_out=fig_out,
            )
        return payload

    @app.get("/api/equity-curve")
    def equity_curve(run: str):
        if artifacts_dir is None:
            raise NotFoundError("no artifacts directory configured")
        candidate = artifacts_dir / run / "equity_curve.csv"
        if not candidate.exists():
            raise NotFoundError(f"no equity curve stored for run {run!r}")
        return PlainTextResponse(
            candidate.read_text(encoding="utf-8"), media_type="text/csv"
        )

    if config.ui_dir:
        ui_dir = Path(config.ui_dir)
        if ui_dir.exists():
            app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
