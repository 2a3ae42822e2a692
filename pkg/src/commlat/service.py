"""HTTP analysis service: sessions over traces, artifacts served verbatim.

Artifacts are derived solely from (trace, config); each is computed once,
persisted as a content-addressed JSON file under the session directory, and
responses return the stored bytes unchanged, so identical requests produce
byte-identical bodies and match the CLI's files exactly.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .artifacts import canonical_json_bytes
from .config import AnalysisConfig
from .errors import (
    EmptyRegionError,
    InfeasibleMappingError,
    ValidationError,
)
from .pipeline import Analysis, load_paired_trace, paired_trace_from_text

logger = logging.getLogger("commlat.service")

STATE_LOADING = "loading"
STATE_READY = "ready"


class SessionStore:
    def __init__(self, data_dir: Path):
        self.data_dir = data_dir
        self.sessions: dict[str, dict] = {}

    def session_dir(self, sid: str) -> Path:
        d = self.data_dir / "sessions" / sid
        d.mkdir(parents=True, exist_ok=True)
        return d

    def persist(self, sid: str, key: str, payload: dict) -> bytes:
        """Content-addressed write; the index maps artifact keys to hashes."""
        data = canonical_json_bytes(payload)
        digest = hashlib.sha256(data).hexdigest()[:16]
        sdir = self.session_dir(sid)
        blob = sdir / f"{digest}.json"
        if not blob.exists():
            blob.write_bytes(data)
        index_path = sdir / "index.json"
        index = json.loads(index_path.read_text()) if index_path.exists() else {}
        if index.get(key) != digest:
            index[key] = digest
            index_path.write_text(json.dumps(index, sort_keys=True, indent=2))
        return data


def create_app(data_dir: str | None = None, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="commlat", version="0.1.0")
    base = Path(data_dir or os.environ.get("COMMLAT_DATA") or tempfile.mkdtemp(prefix="commlat-"))
    store = SessionStore(base)

    @app.middleware("http")
    async def request_log(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        logger.info(
            '{"method": "%s", "path": "%s", "status": %d, "ms": %.1f}',
            request.method, request.url.path, response.status_code,
            (time.monotonic() - started) * 1000.0,
        )
        return response

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    def get_ready_session(sid: str) -> dict | JSONResponse:
        session = store.sessions.get(sid)
        if session is None:
            return error(404, f"unknown session {sid}")
        if session["state"] != STATE_READY:
            return error(409, "trace still loading")
        return session

    def artifact_response(sid: str, key: str, build) -> Response:
        try:
            data = store.persist(sid, key, build())
        except InfeasibleMappingError as exc:
            return error(422, str(exc))
        except EmptyRegionError as exc:
            return error(422, str(exc))
        except ValidationError as exc:
            msg = str(exc)
            return error(404 if msg.startswith("unknown region") else 400, msg)
        return Response(content=data, media_type="application/json")

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.json()
        try:
            config = AnalysisConfig.from_dict(body.get("config") or {})
        except ValueError as exc:
            return error(400, f"bad config: {exc}")

        ident = hashlib.sha256(
            json.dumps(
                {k: body.get(k) for k in ("trace", "node_map", "trace_text", "node_map_text", "format")},
                sort_keys=True,
            ).encode()
            + config.digest().encode()
        ).hexdigest()[:12]
        existing = store.sessions.get(ident)
        if existing is not None:
            return JSONResponse(status_code=201, content={"session_id": ident})

        store.sessions[ident] = {"state": STATE_LOADING, "analysis": None}
        try:
            fmt = body.get("format")
            if body.get("trace_text") is not None:
                trace = paired_trace_from_text(
                    body["trace_text"], body.get("node_map_text", ""), fmt=fmt or "csv"
                )
            elif body.get("trace") is not None:
                trace = load_paired_trace(body["trace"], body["node_map"], fmt=fmt)
            else:
                raise ValidationError("request needs trace/node_map paths or inline text")
            analysis = Analysis(trace, config)
            # eager stages: ingest, criteria, clustering
            store.persist(ident, "ingest", analysis.ingest_artifact())
            store.persist(ident, "regions", analysis.regions_artifact())
        except ValidationError as exc:
            del store.sessions[ident]
            return error(400, str(exc))
        except KeyError as exc:
            del store.sessions[ident]
            return error(400, f"missing field {exc}")
        store.sessions[ident] = {"state": STATE_READY, "analysis": analysis}
        return JSONResponse(status_code=201, content={"session_id": ident})

    @app.get("/sessions/{sid}/regions")
    def get_regions(sid: str):
        session = get_ready_session(sid)
        if isinstance(session, JSONResponse):
            return session
        analysis: Analysis = session["analysis"]
        return artifact_response(sid, "regions", analysis.regions_artifact)

    @app.get("/sessions/{sid}/regions/{rid}/evolution")
    def get_evolution(sid: str, rid: int):
        session = get_ready_session(sid)
        if isinstance(session, JSONResponse):
            return session
        analysis: Analysis = session["analysis"]
        return artifact_response(sid, f"evolution/{rid}", lambda: analysis.evolution_artifact(rid))

    def parse_window(start: str | None, end: str | None) -> tuple[int, int] | JSONResponse:
        if start is None or end is None:
            return error(400, "start and end query parameters are required")
        try:
            s, e = int(start), int(end)
        except ValueError:
            return error(400, "start and end must be integers (microseconds)")
        if s >= e:
            return error(400, f"invalid window [{s}, {e})")
        return s, e

    @app.get("/sessions/{sid}/regions/{rid}/dag")
    def get_dag(sid: str, rid: int, start: str | None = None, end: str | None = None):
        session = get_ready_session(sid)
        if isinstance(session, JSONResponse):
            return session
        window = parse_window(start, end)
        if isinstance(window, JSONResponse):
            return window
        s, e = window
        analysis: Analysis = session["analysis"]
        return artifact_response(
            sid, f"dag/{rid}/{s}/{e}", lambda: analysis.dag_artifact(rid, s, e)
        )

    @app.get("/sessions/{sid}/regions/{rid}/attribution")
    def get_attribution(sid: str, rid: int, start: str | None = None, end: str | None = None):
        session = get_ready_session(sid)
        if isinstance(session, JSONResponse):
            return session
        window = parse_window(start, end)
        if isinstance(window, JSONResponse):
            return window
        s, e = window
        analysis: Analysis = session["analysis"]
        return artifact_response(
            sid, f"attribution/{rid}/{s}/{e}", lambda: analysis.attribution_artifact(rid, s, e)
        )

    @app.post("/sessions/{sid}/remap")
    async def post_remap(sid: str, request: Request):
        session = get_ready_session(sid)
        if isinstance(session, JSONResponse):
            return session
        body = await request.json()
        cores = body.get("cores_per_node")
        if not isinstance(cores, int) or cores < 1:
            return error(400, "cores_per_node must be a positive integer")
        analysis: Analysis = session["analysis"]
        return artifact_response(sid, f"remap/{cores}", lambda: analysis.remap_artifact(cores))

    if ui_dir is None:
        ui_dir = os.environ.get("COMMLAT_UI")
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
