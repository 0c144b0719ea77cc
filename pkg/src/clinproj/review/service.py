"""HTTP API for the revision workflow, backing the browser UI.

All endpoints live under ``/api``; the built UI is served statically at
``/`` when a UI directory is provided. Mutating endpoints can be guarded
with an optional shared token (``X-Review-Token`` header). Every state
change is journaled before it is acknowledged, so a crash or restart
never loses an accepted decision.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..exceptions import InvalidDecision, UnknownAnnotation
from ..model import Status
from .store import Action, Decision, ReviewStore

logger = logging.getLogger(__name__)


class DecisionBody(BaseModel):
    doc_id: str
    ann_id: str
    action: str
    begin: int | None = None
    end: int | None = None
    note: str | None = None
    reviewer: str = ""


class ExportBody(BaseModel):
    output_dir: str


def create_app(store: ReviewStore, *, ui_dir: str | Path | None = None,
               token: str | None = None) -> FastAPI:
    app = FastAPI(title="annotation review service")

    def check_token(provided: str | None) -> None:
        if token is not None and provided != token:
            raise HTTPException(status_code=401, detail="missing or bad token")

    @app.get("/api/documents")
    def list_documents() -> list[dict]:
        out = []
        for doc_id in store.document_ids():
            mismatches, missing = store.pending_counts(doc_id)
            view = store.document_view(doc_id)
            out.append({
                "doc_id": doc_id,
                "language": view["language"],
                "pending_mismatches": mismatches,
                "pending_missing": missing,
            })
        return out

    @app.get("/api/documents/{doc_id}")
    def get_document(doc_id: str) -> dict:
        try:
            return store.document_view(doc_id)
        except UnknownAnnotation as e:
            raise HTTPException(status_code=404, detail=str(e)) from e

    @app.get("/api/queue")
    def get_queue(status: str | None = None) -> list[dict]:
        parsed = None
        if status is not None:
            try:
                parsed = Status(status)
            except ValueError as e:
                raise HTTPException(status_code=422,
                                    detail=f"unknown status {status!r}") from e
        return store.queue(parsed)

    @app.post("/api/decisions")
    def post_decision(body: DecisionBody,
                      x_review_token: str | None = Header(default=None)) -> dict:
        check_token(x_review_token)
        try:
            action = Action(body.action)
        except ValueError as e:
            raise HTTPException(status_code=422,
                                detail=f"unknown action {body.action!r}") from e
        decision = Decision(doc_id=body.doc_id, ann_id=body.ann_id,
                            action=action, begin=body.begin, end=body.end,
                            note=body.note, reviewer=body.reviewer)
        try:
            return store.apply(decision)
        except UnknownAnnotation as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        except InvalidDecision as e:
            raise HTTPException(status_code=422, detail=str(e)) from e

    @app.get("/api/stats")
    def get_stats() -> dict:
        return store.stats().to_json_dict()

    @app.post("/api/export")
    def post_export(body: ExportBody,
                    x_review_token: str | None = Header(default=None)) -> dict:
        check_token(x_review_token)
        try:
            stats = store.export(body.output_dir)
        except OSError as e:
            raise HTTPException(status_code=500, detail=str(e)) from e
        return stats.to_json_dict()

    if ui_dir is not None and Path(ui_dir).is_dir():
        ui_path = Path(ui_dir)

        @app.get("/")
        def index() -> FileResponse:
            return FileResponse(ui_path / "index.html")

        app.mount("/", StaticFiles(directory=ui_path), name="ui")
    else:

        @app.get("/")
        def index_placeholder() -> dict:
            return {"service": "annotation review",
                    "hint": "API under /api; no UI directory configured"}

    return app


def serve(corpus_dir: str | Path, journal_path: str | Path, *,
          source_dir: str | Path | None = None, host: str = "127.0.0.1",
          port: int = 8800, ui_dir: str | Path | None = None,
          token: str | None = None) -> None:
    """Load the corpus, replay the journal, and serve until interrupted."""
    import uvicorn

    store = ReviewStore.open(corpus_dir, journal_path, source_dir)
    app = create_app(store, ui_dir=ui_dir, token=token)
    logger.info("serving review API on %s:%d", host, port)
    uvicorn.run(app, host=host, port=port, log_level="info")
