"""HTTP control and query plane (v1) plus the live update stream.

All control is plain request/response; observation happens through query
endpoints (pure views over the run log) and a unidirectional
text/event-stream of log records. Stream event ids are log sequence
numbers, so clients dedup and resume with `from_sequence`; run-state
changes ride along as id-less auxiliary events.

Locking: a single lock serializes writes (tick execution, control,
mutations). Reads are lock-free over the append-only record list, so
queries and the stream never contend with the driver. Mutations fail
fast with STATE_LOCKED while Running; pause is a request the driver
honors at the next tick boundary.

Single-operator tool: no authentication, permissive CORS (a UI served
from another origin only needs the JSON API).
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .config import load_config, validate_config
from .errors import (
    FilterError,
    NotFoundError,
    ParseError,
    PreconditionError,
    SimsparkError,
    StateError,
    StateLockedError,
    TimePastError,
)
from .loop import FINISHED, IDLE, PAUSED, RUNNING, Simulation
from .persistence import EXPORT_KINDS, LogView, dump_line

STREAM_POLL_SECONDS = 0.2
CONTROL_TIMEOUT_SECONDS = 120.0


class StreamHub:
    """Wakes stream subscribers whenever the log grows or state changes."""

    def __init__(self):
        self.condition = threading.Condition()

    def notify(self, *_args) -> None:
        with self.condition:
            self.condition.notify_all()

    def wait(self, timeout: float) -> None:
        with self.condition:
            self.condition.wait(timeout)


def _status_for(exc: SimsparkError) -> int:
    if isinstance(exc, (StateLockedError, StateError, TimePastError)):
        return 409
    if isinstance(exc, NotFoundError):
        return 404
    if isinstance(exc, FilterError):
        return 400
    if isinstance(exc, (ParseError, PreconditionError)):
        return 422
    return 400


def create_app(sim: Simulation, ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="simspark", version="1")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    write_lock = threading.RLock()
    hub = StreamHub()
    sim.on_append = hub.notify
    sim.on_state = hub.notify

    def view() -> LogView:
        # records are append-only and immutable once appended; a shallow
        # copy is a consistent-enough snapshot for every query
        return LogView(list(sim.store.records))

    def guard_mutable() -> None:
        if sim.state.status == RUNNING:
            raise StateLockedError("configuration is locked while the simulation is Running")
        if sim.state.status == FINISHED:
            raise StateLockedError("the run is Finished; reset before editing the configuration")

    @app.exception_handler(SimsparkError)
    async def handle_simspark_error(request: Request, exc: SimsparkError):
        return JSONResponse(status_code=_status_for(exc), content={"error": exc.to_json()})

    # -- configuration ------------------------------------------------------------

    @app.get("/v1/config")
    def get_config():
        return sim.registry.to_document()

    @app.put("/v1/config")
    def put_config(document: dict):
        guard_mutable()
        config, agents, npcs, events = load_config(document)
        report = validate_config(config, agents, npcs, events)
        if not report.ok:
            return JSONResponse(status_code=422, content=report.to_json())
        with write_lock:
            def swap(reg):
                reg.replace_config(config)
                reg.agents = {a.agent_id: a for a in agents}
                reg.npcs = {n.npc_id: n for n in npcs}
                reg.events = {e.event_id: e for e in events}

            sim.mutate(swap)
        return report.to_json()

    def _upsert(kind: str, payload: dict):
        guard_mutable()
        document = {"simulation": sim.registry.to_document()["simulation"], f"{kind}s": [payload]}
        config, agents, npcs, events = load_config(document)
        entity = {"agent": agents, "npc": npcs, "event": events}[kind][0]
        with write_lock:
            candidate = {
                "agent": lambda: (
                    [a for a in sim.registry.agent_list() if a.agent_id != entity.agent_id] + [entity],
                    sim.registry.npc_list(),
                    sim.registry.event_list(),
                ),
                "npc": lambda: (
                    sim.registry.agent_list(),
                    [n for n in sim.registry.npc_list() if n.npc_id != entity.npc_id] + [entity],
                    sim.registry.event_list(),
                ),
                "event": lambda: (
                    sim.registry.agent_list(),
                    sim.registry.npc_list(),
                    [e for e in sim.registry.event_list() if e.event_id != entity.event_id] + [entity],
                ),
            }[kind]()
            report = validate_config(sim.registry.config, *candidate)
            if not report.ok:
                return JSONResponse(status_code=422, content=report.to_json())
            if kind == "agent":
                sim.mutate(lambda reg: reg.upsert_agent(entity))
            elif kind == "npc":
                sim.mutate(lambda reg: reg.upsert_npc(entity))
            else:
                if sim.state.status == PAUSED:
                    sim.inject_event(entity)
                else:
                    sim.mutate(lambda reg: reg.add_event(entity))
            return report.to_json()

    @app.post("/v1/agents")
    def post_agent(payload: dict):
        return _upsert("agent", payload)

    @app.post("/v1/npcs")
    def post_npc(payload: dict):
        return _upsert("npc", payload)

    @app.post("/v1/events")
    def post_event(payload: dict):
        return _upsert("event", payload)

    @app.delete("/v1/entities/{entity_id}")
    def delete_entity(entity_id: str):
        guard_mutable()
        with write_lock:
            sim.mutate(lambda reg: reg.remove_entity(entity_id))
        return {"removed": entity_id}

    @app.get("/v1/validate")
    def get_validation():
        return sim.registry.validate().to_json()

    # -- run control ----------------------------------------------------------------

    def _drive():
        while True:
            with write_lock:
                if sim.state.status != RUNNING:
                    break
                sim.step_tick()
                if sim.boundary_pause_due() and sim.state.status == RUNNING:
                    sim.pause()
                    break
            time.sleep(0.001)  # let control/mutation handlers interleave
        hub.notify()

    def _spawn_driver() -> None:
        thread = threading.Thread(target=_drive, name="simspark-driver", daemon=True)
        thread.start()

    def _await_not_running() -> None:
        deadline = time.time() + CONTROL_TIMEOUT_SECONDS
        while time.time() < deadline:
            if sim.state.status != RUNNING:
                return
            time.sleep(0.005)
        raise StateError("the driver did not reach a tick boundary in time")

    @app.post("/v1/run/start")
    def run_start():
        with write_lock:
            state = sim.start()
        _spawn_driver()
        return state.to_json()

    @app.post("/v1/run/pause")
    def run_pause():
        if sim.state.status != RUNNING:
            raise StateError(f"cannot pause from {sim.state.status}")
        sim.request_pause()
        _await_not_running()
        return sim.state.to_json()

    @app.post("/v1/run/resume")
    def run_resume():
        with write_lock:
            state = sim.resume()
        _spawn_driver()
        return state.to_json()

    @app.post("/v1/run/reset")
    def run_reset():
        if sim.state.status == RUNNING:
            sim.request_pause()
            _await_not_running()
        with write_lock:
            state = sim.reset()
        hub.notify()
        return state.to_json()

    @app.get("/v1/run")
    def run_state():
        return sim.state.to_json()

    # -- queries ----------------------------------------------------------------------

    @app.get("/v1/calendar")
    def calendar(
        agent: Optional[str] = None,
        min_importance: int = Query(1, ge=1, le=10),
        kinds: Optional[str] = None,
    ):
        kind_set = set(kinds.split(",")) if kinds else None
        if kind_set is not None and not kind_set <= {"daily", "social"}:
            raise FilterError(f"unknown kind filter {kinds!r}")
        return view().calendar(agent=agent, min_importance=min_importance, kinds=kind_set)

    @app.get("/v1/sparks")
    def sparks(cursor: int = Query(0, ge=0), limit: int = Query(100, ge=1, le=1000)):
        rows = view().assembled_sparks()
        page = rows[cursor : cursor + limit]
        next_cursor = cursor + limit if cursor + limit < len(rows) else None
        return {"items": page, "next_cursor": next_cursor, "total": len(rows)}

    @app.get("/v1/sparks/{spark_id}")
    def spark_detail(spark_id: str):
        for row in view().assembled_sparks():
            if row["spark_id"] == spark_id:
                return row
        raise NotFoundError(f"no spark {spark_id!r}")

    @app.get("/v1/reasoning/{record_id}")
    def reasoning(record_id: str):
        log_view = view()
        if record_id.startswith("t-"):
            return log_view.trace(record_id)
        return log_view.reasoning_for(record_id)

    @app.get("/v1/hidden/{spark_id}")
    def hidden(spark_id: str):
        return view().hidden(spark_id)

    @app.get("/v1/network")
    def network(at_tick: Optional[int] = None):
        log_view = view()
        if at_tick is not None and at_tick > sim.state.current_tick:
            raise FilterError(f"tick {at_tick} is in the future")
        return {
            "edges": log_view.network_at(at_tick),
            "agents": [
                {"agent_id": a.agent_id, "name": a.name, "avatar": a.avatar}
                for a in sim.registry.agent_list()
            ],
        }

    @app.get("/v1/export/{what}")
    def export(what: str, embeddings: bool = False):
        if what not in EXPORT_KINDS:
            raise NotFoundError(f"unknown export kind {what!r}")
        lines = sim.store.export(what, include_embeddings=embeddings)
        return StreamingResponse(
            iter([("\n".join(lines) + "\n") if lines else ""]),
            media_type="application/jsonl",
        )

    # -- live stream --------------------------------------------------------------------

    @app.get("/v1/stream")
    def stream(from_sequence: int = Query(0, ge=0)):
        def generate():
            cursor = from_sequence
            last_state: Optional[str] = None
            while True:
                records = list(sim.store.records[cursor:])
                state_json = json.dumps(sim.state.to_json(), sort_keys=True)
                status = sim.state.status
                for record in records:
                    yield (
                        f"id: {record['seq']}\n"
                        f"event: {record['type']}\n"
                        f"data: {dump_line(record)}\n\n"
                    )
                cursor += len(records)
                if state_json != last_state:
                    last_state = state_json
                    yield f"event: run_state_changed\ndata: {state_json}\n\n"
                if not records:
                    if status in (FINISHED, IDLE):
                        yield "event: end\ndata: {}\n\n"
                        return
                    hub.wait(STREAM_POLL_SECONDS)

        return StreamingResponse(generate(), media_type="text/event-stream")

    if ui_dir:
        app.mount("/", StaticFiles(directory=Path(ui_dir), html=True), name="ui")

    return app
