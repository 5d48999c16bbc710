"""Session-oriented HTTP facade over solving, dynamics and explanation.

Sessions are in-memory and single-writer: mutations on one session are
serialized and a losing concurrent request gets 409. Solves whose budget
exceeds the async threshold run off the request path; clients poll the
session until ``pending`` clears. Snapshots make a what-if trail portable.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Optional

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import formats
from .dynamics import DynamicPolicy, ExecutionState, apply_event, begin_execution, resolve_dynamic
from .errors import (EventRejectedError, InstanceIsFeasibleError, MapfError, NoSuchWaitError,
                     PlanInfeasibleError, SchemaError, UnknownAgentError)
from .explain import ExplainConfig, check_modified_plan, why_infeasible, why_nonoptimal, why_wait
from .model import Instance, Plan
from .solver import deadline_from_timeout, solve_optimal


@dataclass
class ServiceConfig:
    default_timeout_s: float = 60.0
    async_threshold_s: float = 60.0  # budgets above this run off the request path
    policy: DynamicPolicy = field(default_factory=DynamicPolicy)
    explain: ExplainConfig = field(default_factory=ExplainConfig)


class _Session:
    def __init__(self, sid: str, instance: Instance):
        self.id = sid
        self.instance = instance
        self.exec: Optional[ExecutionState] = None
        self.history: list[dict] = []
        self.lock = threading.Lock()
        self.pending = False
        self.last_solve: Optional[dict] = None

    @property
    def plan(self) -> Optional[Plan]:
        return self.exec.plan if self.exec is not None else None

    def record(self, op: str, body: Any, response: dict) -> None:
        self.history.append({"request": {"op": op, "body": body}, "response": response})

    def snapshot(self) -> dict:
        doc = {"instance": formats.instance_to_json(self.instance),
               "t_now": self.exec.t_now if self.exec else 0,
               "stale": bool(self.exec and self.exec.stale),
               "history": self.history}
        if self.plan is not None:
            doc["plan"] = formats.plan_to_json(self.plan)
        return doc


def _error(status: int, err: MapfError | str, code: str = "error") -> JSONResponse:
    body = err.to_json() if isinstance(err, MapfError) else {"code": code, "message": err}
    return JSONResponse(status_code=status, content={"error": body})


def create_app(config: ServiceConfig = ServiceConfig()) -> FastAPI:
    app = FastAPI(title="mapfkit", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    sessions: dict[str, _Session] = {}
    counter = {"n": 0}
    registry_lock = threading.Lock()
    app.state.sessions = sessions
    app.state.config = config

    @app.exception_handler(RequestValidationError)
    async def _on_validation(_req: Request, exc: RequestValidationError):
        return _error(400, SchemaError("$", "malformed request body"))

    def get_session(sid: str) -> _Session | JSONResponse:
        session = sessions.get(sid)
        if session is None:
            return _error(404, f"no session {sid!r}", code="session_not_found")
        return session

    @app.post("/sessions")
    def create_session(payload: dict = Body(...)):
        try:
            if "snapshot" in payload:
                snap = payload["snapshot"]
                instance = formats.instance_from_json(snap.get("instance"), "$.snapshot.instance")
            else:
                instance = formats.instance_from_json(payload.get("instance"), "$.instance")
        except SchemaError as e:
            return _error(400, e)
        with registry_lock:
            counter["n"] += 1
            sid = f"s{counter['n']}"
            session = _Session(sid, instance)
            sessions[sid] = session
        if "snapshot" in payload:
            snap = payload["snapshot"]
            if "plan" in snap:
                try:
                    plan = formats.plan_from_json(snap["plan"], instance, "$.snapshot.plan")
                except SchemaError as e:
                    return _error(400, e)
                session.exec = begin_execution(instance, plan)
            session.history = list(snap.get("history", []))
        return {"session_id": sid}

    def _run_solve(session: _Session, timeout_s: float) -> dict:
        res = solve_optimal(session.instance, deadline=deadline_from_timeout(timeout_s))
        doc = formats.solve_result_to_json(res)
        if res.is_sat:
            session.exec = begin_execution(session.instance, res.plan)
        session.last_solve = doc
        session.record("solve", {"timeout": timeout_s}, doc)
        return doc

    @app.post("/sessions/{sid}/solve")
    def solve(sid: str, payload: dict = Body(default={})):
        session = get_session(sid)
        if isinstance(session, JSONResponse):
            return session
        timeout_s = payload.get("timeout", config.default_timeout_s)
        if not isinstance(timeout_s, (int, float)) or timeout_s <= 0:
            return _error(400, SchemaError("$.timeout", "timeout must be a positive number"))
        if not session.lock.acquire(blocking=False):
            return _error(409, "another mutation is running on this session",
                          code="session_busy")
        if timeout_s > config.async_threshold_s:
            session.pending = True

            def worker():
                try:
                    _run_solve(session, timeout_s)
                finally:
                    session.pending = False
                    session.lock.release()

            threading.Thread(target=worker, daemon=True).start()
            return JSONResponse(status_code=202, content={"status": "pending"})
        try:
            doc = _run_solve(session, timeout_s)
        finally:
            session.lock.release()
        if doc["outcome"] == "timeout":
            return _error(504, "solve timed out", code="timeout")
        return doc

    @app.post("/sessions/{sid}/validate")
    def validate_plan(sid: str, payload: dict = Body(...)):
        from .validation import validate as _validate

        session = get_session(sid)
        if isinstance(session, JSONResponse):
            return session
        try:
            plan = formats.plan_from_json(payload.get("plan"), session.instance, "$.plan")
        except SchemaError as e:
            return _error(400, e)
        doc = _validate(session.instance, plan).to_json()
        session.record("validate", payload, doc)
        return doc

    @app.post("/sessions/{sid}/event")
    def post_event(sid: str, payload: dict = Body(...)):
        session = get_session(sid)
        if isinstance(session, JSONResponse):
            return session
        try:
            event = formats.event_from_json(payload.get("event"), "$.event")
        except SchemaError as e:
            return _error(400, e)
        if not session.lock.acquire(blocking=False):
            return _error(409, "another mutation is running on this session",
                          code="session_busy")
        try:
            if session.exec is None:
                return _error(422, "solve the session before sending events",
                              code="no_active_plan")
            try:
                state = apply_event(session.exec, event)
            except EventRejectedError as e:
                return _error(422, e)
            res = resolve_dynamic(state, config.policy,
                                  deadline=deadline_from_timeout(config.default_timeout_s))
            if res.outcome == "timeout":
                return _error(504, "dynamic resolve timed out", code="timeout")
            if res.is_sat:
                session.exec = state.with_plan(res.plan)
            else:
                session.exec = state
            doc = formats.dynamic_result_to_json(res)
            session.record("event", payload, doc)
            return doc
        finally:
            session.lock.release()

    @app.post("/sessions/{sid}/query")
    def post_query(sid: str, payload: dict = Body(...)):
        session = get_session(sid)
        if isinstance(session, JSONResponse):
            return session
        query = payload.get("query")
        if not isinstance(query, dict) or "kind" not in query:
            return _error(400, SchemaError("$.query", "expected an object with a 'kind'"))
        kind = query["kind"]
        deadline = deadline_from_timeout(config.default_timeout_s)
        try:
            if kind == "why_wait":
                if session.plan is None:
                    return _error(422, "no active plan; solve first", code="no_active_plan")
                window = query.get("window")
                if window is not None:
                    window = (int(window[0]), int(window[1]))
                exp = why_wait(session.instance, session.plan, query.get("agent"),
                               int(query.get("vertex", -1)), window, deadline=deadline)
                doc = formats.explanation_to_json(exp)
            elif kind == "why_infeasible":
                exps = why_infeasible(session.instance, config.explain, deadline=deadline)
                doc = {"explanations": [formats.explanation_to_json(e) for e in exps]}
            elif kind == "check_plan":
                plan = formats.plan_from_json(query.get("plan"), session.instance,
                                              "$.query.plan")
                doc = formats.explanation_to_json(
                    check_modified_plan(session.instance, plan, deadline=deadline))
            elif kind == "why_nonoptimal":
                plan = formats.plan_from_json(query.get("plan"), session.instance,
                                              "$.query.plan")
                doc = formats.explanation_to_json(
                    why_nonoptimal(session.instance, plan, deadline=deadline))
            else:
                return _error(400, SchemaError("$.query.kind", f"unknown query kind {kind!r}"))
        except SchemaError as e:
            return _error(400, e)
        except (InstanceIsFeasibleError, NoSuchWaitError, PlanInfeasibleError,
                UnknownAgentError) as e:
            return _error(422, e)
        session.record("query", payload, doc)
        return doc

    @app.get("/sessions/{sid}")
    def get_state(sid: str):
        session = get_session(sid)
        if isinstance(session, JSONResponse):
            return session
        doc = session.snapshot()
        doc["session_id"] = session.id
        doc["pending"] = session.pending
        if session.last_solve is not None:
            doc["last_solve"] = session.last_solve
        return doc

    @app.get("/sessions/{sid}/snapshot")
    def get_snapshot(sid: str):
        session = get_session(sid)
        if isinstance(session, JSONResponse):
            return session
        return {"snapshot": session.snapshot()}

    @app.delete("/sessions/{sid}")
    def delete_session(sid: str):
        session = get_session(sid)
        if isinstance(session, JSONResponse):
            return session
        del sessions[sid]
        return {"deleted": sid}

    return app
