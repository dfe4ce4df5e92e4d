"""HTTP API: sessions, synchronous utterance ingestion, resumable event stream.

One writer lock per session serializes POSTs; readers consume snapshots and
the append-only event list without blocking the writer.  The event stream
is newline-delimited JSON with a `seq` field: it replays from the requested
sequence number and then follows live (at-least-once; clients dedup by
seq).  Slow or disconnected consumers simply resume from their last seq.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, Response, StreamingResponse

from .canonical import canonical_dumps
from .graph import dot_from_snapshot
from .ingest import IdeaTriple, Utterance
from .lexicon import Lexicon, load_lexicon
from .metrics import delta_report
from .session import ConfigError, Session, SessionConfig

STREAM_POLL_SECONDS = 0.2
STREAM_HEARTBEAT_SECONDS = 15.0


@dataclass
class ServerSession:
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    wakeup: threading.Condition = field(default_factory=threading.Condition)
    created_at: str = ""
    prev_report: dict | None = None

    def descriptor(self) -> dict:
        return {
            "session_id": self.session.session_id,
            "created_at": self.created_at,
            "utterance_count": sum(
                1 for e in self.session.events if e.kind == "utterance_received"
            ),
            "config": self.session.cfg.to_dict(),
        }


class ServiceState:
    def __init__(self, lexicons: dict[str, Lexicon]) -> None:
        self.lexicons = lexicons
        self.sessions: dict[str, ServerSession] = {}
        self._counter = 0
        self._lock = threading.Lock()

    def new_session_id(self) -> str:
        with self._lock:
            self._counter += 1
            return f"s-{self._counter:04d}"


def builtin_lexicons() -> dict[str, Lexicon]:
    from . import data_path

    return {"case_study": load_lexicon(data_path("case_study.lex"))}


def create_app(
    lexicons: dict[str, Lexicon] | None = None, lexicon_dir: str | Path | None = None
) -> FastAPI:
    registry = dict(lexicons) if lexicons is not None else builtin_lexicons()
    if lexicon_dir is not None:
        for path in sorted(Path(lexicon_dir).glob("*.lex")):
            registry[path.stem] = load_lexicon(path)

    app = FastAPI(title="icnflow", version="0.1.0")
    state = ServiceState(registry)
    app.state.icnflow = state

    def get_session(session_id: str) -> ServerSession:
        holder = state.sessions.get(session_id)
        if holder is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return holder

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "sessions": len(state.sessions)}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict) -> dict:
        lexicon_name = body.get("lexicon", "case_study")
        if lexicon_name not in state.lexicons:
            raise HTTPException(status_code=404, detail=f"unknown lexicon {lexicon_name!r}")
        try:
            cfg = SessionConfig.from_dict(body.get("config", {}))
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        session_id = body.get("session_id") or state.new_session_id()
        if session_id in state.sessions:
            raise HTTPException(status_code=409, detail=f"session {session_id!r} exists")
        holder = ServerSession(
            session=Session(
                cfg,
                state.lexicons[lexicon_name],
                body.get("problem_statement", ""),
                session_id=session_id,
            ),
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        state.sessions[session_id] = holder
        return holder.descriptor()

    @app.post("/sessions/{session_id}/utterances")
    def post_utterance(session_id: str, body: dict) -> Response:
        holder = get_session(session_id)
        try:
            pre = None
            if "triples" in body:
                pre = tuple(IdeaTriple.from_dict(r) for r in body["triples"])
            utterance = Utterance(
                id=int(body["id"]),
                speaker=str(body.get("speaker", "")),
                t=int(body.get("t_ms", 0)),
                text=str(body.get("text", "")),
                session=session_id,
                pre_annotation=pre,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad utterance: {exc}") from None

        with holder.lock:
            prev = holder.session.last_report
            batch = holder.session.process_utterance(utterance)
            stale = any(
                e.kind == "error" and e.payload.get("reason") == "stale_utterance" for e in batch
            )
            if stale:
                raise HTTPException(status_code=409, detail=f"stale utterance id {utterance.id}")
            report = holder.session.last_report
            touched = sorted(
                {
                    e.payload["icn_id"]
                    for e in batch
                    if e.kind in ("icn_created", "icn_joined", "image_tagged")
                }
            )
            payload = {
                "events": [e.to_dict() for e in batch],
                "metrics": report.to_dict(),
                "metrics_delta": delta_report(prev, report).to_dict(),
                "graph_fragment": {
                    "icns": {
                        icn_id: holder.session.graph.icns[icn_id].to_dict() for icn_id in touched
                    },
                    "edges": [e.payload for e in batch if e.kind == "edge_added"],
                },
                "at_seq": len(holder.session.events),
            }
        with holder.wakeup:
            holder.wakeup.notify_all()
        return Response(content=canonical_dumps(payload), media_type="application/json")

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str, request: Request) -> StreamingResponse:
        holder = get_session(session_id)
        params = request.query_params
        try:
            from_seq = int(params.get("from", 1))
        except ValueError:
            raise HTTPException(status_code=400, detail="'from' must be an integer") from None
        if from_seq < 1:
            raise HTTPException(status_code=400, detail="'from' must be >= 1")
        follow = params.get("follow", "1") not in ("0", "false", "no")

        def generate():
            cursor = from_seq - 1
            idle = 0.0
            while True:
                events = holder.session.events
                while cursor < len(events):
                    event = events[cursor]
                    cursor += 1
                    idle = 0.0
                    yield canonical_dumps(event.to_dict()) + "\n"
                if not follow:
                    return
                with holder.wakeup:
                    holder.wakeup.wait(timeout=STREAM_POLL_SECONDS)
                idle += STREAM_POLL_SECONDS
                if idle >= STREAM_HEARTBEAT_SECONDS:
                    idle = 0.0
                    yield canonical_dumps({"kind": "heartbeat", "seq": cursor}) + "\n"

        return StreamingResponse(generate(), media_type="application/x-ndjson")

    @app.get("/sessions/{session_id}/snapshot")
    def get_snapshot(session_id: str, format: str = "json") -> Response:
        holder = get_session(session_id)
        with holder.lock:
            snapshot = holder.session.snapshot()
        if format == "json":
            return Response(content=canonical_dumps(snapshot), media_type="application/json")
        if format == "dot":
            return PlainTextResponse(dot_from_snapshot(snapshot["graph"]))
        raise HTTPException(status_code=400, detail=f"unknown format {format!r}")

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str) -> Response:
        holder = get_session(session_id)
        with holder.lock:
            report = holder.session.last_report.to_dict()
        return Response(content=canonical_dumps(report), media_type="application/json")

    return app


def run_server(host: str, port: int, lexicon_dir: str | None = None) -> None:  # pragma: no cover
    import uvicorn

    uvicorn.run(create_app(lexicon_dir=lexicon_dir), host=host, port=port)
