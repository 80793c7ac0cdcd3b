"""HTTP service exposing the diacritization pipeline.

All endpoints speak UTF-8 JSON unless an export format says otherwise:

*   ``POST /api/diacritize``   body ``{text, genre?, matres?, beam?}`` ->
    ``{doc_id, document}``
*   ``GET  /api/doc/{id}``     -> ``{doc_id, document}``
*   ``POST /api/doc/{id}/select``  body ``{word_index, alt_index, apply_all?}``
    -> ``{doc_id, changed, document}``
*   ``GET  /api/doc/{id}/export?format=plain|html|structured``
*   ``GET  /api/health``       -> ``{status, genres}``

Errors are machine readable: ``{"error": {"code": ..., "message": ...}}``
with HTTP 400 for malformed requests, 404 for unknown documents and 413
when the input text exceeds the service limit.

Documents live in an in-memory LRU cache keyed by an opaque id.  The
neural models keep internal scratch state during a forward pass, so
inference is serialized behind one lock; selection updates are
serialized per document.
"""

from __future__ import annotations

import threading
import uuid
from collections import OrderedDict

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .hebrew import MATRES_KEEP, MATRES_REMOVE
from .pipeline import (
    AnnotatedDocument,
    Pipeline,
    PipelineError,
    document_to_dict,
    export_html,
    export_plain,
    select_alternative,
)

MAX_TEXT_CHARS = 100_000
MAX_BEAM_WIDTH = 128
DEFAULT_CACHE_SIZE = 256
GENRES = ("modern", "rabbinic", "poetry")
EXPORT_FORMATS = ("plain", "html", "structured")

_MATRES_ALIASES = {
    "keep": MATRES_KEEP,
    MATRES_KEEP: MATRES_KEEP,
    "remove": MATRES_REMOVE,
    MATRES_REMOVE: MATRES_REMOVE,
}


class DiacritizeRequest(BaseModel):
    text: str
    genre: str = "modern"
    matres: str = "keep"
    beam: int = 8


class SelectRequest(BaseModel):
    word_index: int
    alt_index: int
    apply_all: bool = False


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    payload = {"error": {"code": code, "message": message, **extra}}
    return JSONResponse(status_code=status, content=payload)


class _DocStore:
    """In-memory LRU of annotated documents, one mutation lock per entry."""

    def __init__(self, capacity: int) -> None:
        self._capacity = capacity
        self._entries: OrderedDict[str, tuple[AnnotatedDocument, threading.Lock]]
        self._entries = OrderedDict()
        self._lock = threading.Lock()

    def put(self, document: AnnotatedDocument) -> str:
        doc_id = uuid.uuid4().hex
        with self._lock:
            self._entries[doc_id] = (document, threading.Lock())
            self._entries.move_to_end(doc_id)
            while len(self._entries) > self._capacity:
                self._entries.popitem(last=False)
        return doc_id

    def get(self, doc_id: str) -> tuple[AnnotatedDocument, threading.Lock] | None:
        with self._lock:
            entry = self._entries.get(doc_id)
            if entry is not None:
                self._entries.move_to_end(doc_id)
            return entry


def create_app(
    pipelines: dict[str, Pipeline],
    *,
    max_chars: int = MAX_TEXT_CHARS,
    cache_size: int = DEFAULT_CACHE_SIZE,
) -> FastAPI:
    """Build the service around already-loaded pipelines.

    ``pipelines`` maps genre names to pipelines.  ``modern`` is required;
    ``rabbinic`` is optional (a separately trained model and lexicon).
    ``poetry`` reuses the modern pipeline with the morphology stage
    skipped, so it never appears in the mapping.
    """
    if "modern" not in pipelines:
        raise ValueError("pipelines must include the 'modern' genre")

    app = FastAPI(title="nakdan", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = _DocStore(cache_size)
    model_lock = threading.Lock()
    available = tuple(g for g in GENRES if g == "poetry" or g in pipelines)

    @app.exception_handler(RequestValidationError)
    async def _invalid_request(request, exc: RequestValidationError):
        detail = [
            {"loc": [str(part) for part in err.get("loc", ())], "msg": err.get("msg", "")}
            for err in exc.errors()
        ]
        return _error(400, "invalid_request", "request body failed validation", detail=detail)

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "genres": list(available)}

    @app.post("/api/diacritize")
    def diacritize(req: DiacritizeRequest):
        if len(req.text) > max_chars:
            return _error(
                413,
                "text_too_long",
                f"text exceeds the {max_chars}-character limit",
                limit=max_chars,
                length=len(req.text),
            )
        if req.genre not in GENRES:
            return _error(
                400, "unknown_genre", f"unknown genre {req.genre!r}", choices=list(GENRES)
            )
        if req.genre == "rabbinic" and "rabbinic" not in pipelines:
            return _error(
                400,
                "genre_unavailable",
                "no rabbinic model is loaded",
                choices=list(available),
            )
        policy = _MATRES_ALIASES.get(req.matres)
        if policy is None:
            return _error(
                400,
                "unknown_matres",
                f"unknown matres policy {req.matres!r}",
                choices=sorted(set(_MATRES_ALIASES)),
            )
        if not 1 <= req.beam <= MAX_BEAM_WIDTH:
            return _error(
                400,
                "invalid_beam",
                f"beam width must be between 1 and {MAX_BEAM_WIDTH}",
            )
        pipeline = pipelines["rabbinic" if req.genre == "rabbinic" else "modern"]
        with model_lock:
            document = pipeline.diacritize(
                req.text,
                matres=policy,
                beam_width=req.beam,
                skip_morphology=req.genre == "poetry",
            )
        doc_id = store.put(document)
        return {"doc_id": doc_id, "document": document_to_dict(document)}

    @app.get("/api/doc/{doc_id}")
    def get_document(doc_id: str):
        entry = store.get(doc_id)
        if entry is None:
            return _error(404, "unknown_document", f"no document {doc_id!r}")
        document, lock = entry
        with lock:
            return {"doc_id": doc_id, "document": document_to_dict(document)}

    @app.post("/api/doc/{doc_id}/select")
    def select(doc_id: str, req: SelectRequest):
        entry = store.get(doc_id)
        if entry is None:
            return _error(404, "unknown_document", f"no document {doc_id!r}")
        document, lock = entry
        with lock:
            try:
                changed = select_alternative(
                    document, req.word_index, req.alt_index, apply_all=req.apply_all
                )
            except PipelineError as err:
                return _error(400, "invalid_selection", str(err))
            return {
                "doc_id": doc_id,
                "changed": changed,
                "document": document_to_dict(document),
            }

    @app.get("/api/doc/{doc_id}/export")
    def export(doc_id: str, format: str = "plain"):
        if format not in EXPORT_FORMATS:
            return _error(
                400,
                "unknown_format",
                f"unknown export format {format!r}",
                choices=list(EXPORT_FORMATS),
            )
        entry = store.get(doc_id)
        if entry is None:
            return _error(404, "unknown_document", f"no document {doc_id!r}")
        document, lock = entry
        with lock:
            if format == "plain":
                return PlainTextResponse(export_plain(document))
            if format == "html":
                return HTMLResponse(export_html(document))
            return JSONResponse(document_to_dict(document))

    return app


def build_app(
    model_dir,
    rabbinic_dir=None,
    *,
    max_chars: int = MAX_TEXT_CHARS,
    cache_size: int = DEFAULT_CACHE_SIZE,
) -> FastAPI:
    """Load pipelines from model directories and build the service."""
    pipelines = {"modern": Pipeline.load(model_dir)}
    if rabbinic_dir is not None:
        pipelines["rabbinic"] = Pipeline.load(rabbinic_dir)
    return create_app(pipelines, max_chars=max_chars, cache_size=cache_size)
