"""HTTP session service: a durable ask-tell loop behind five endpoints.

POST /sessions            create a session from a JSON config
GET  /sessions/{id}/ask   the pending recommendation (computed on first call)
POST /sessions/{id}/tell  submit observations for the pending recommendation
GET  /sessions/{id}/state current step, pending ask, best value, status
GET  /sessions/{id}/history  per-step query points and observations

Every state change is appended to a per-session JSON Lines journal and
fsynced before it is applied, so a crash loses at most an unacknowledged
request: session state is a pure fold over the journal, and startup replays
it. Error bodies are always {"code", "message", "field"}.
"""

import json
import os
import pathlib
import secrets
import threading

import numpy as np
from fastapi import Body, FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .data import Dataset, TaggedDatasets
from .errors import AskoptError, ModelFitError, ValidationError
from .loop import AskTellSession, expected_tags
from .rules import RuleConfig
from .spaces import BoxSpace

__all__ = ["create_app", "SessionStore"]

_ID_BYTES = 16  # token_urlsafe(16) -> 22-char URL-safe id


class ServiceError(Exception):
    """An error with a fixed HTTP status and machine-readable code."""

    def __init__(self, status, code, message, field=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.field = field

    def body(self):
        return {"code": self.code, "message": str(self), "field": self.field}


def _not_found(session_id):
    return ServiceError(404, "not-found", f"no session {session_id!r}")


def _conflict(message):
    return ServiceError(409, "conflict", message)


def _bad_request(message, field=None):
    return ServiceError(400, "invalid-request", message, field=field)


class _LiveSession:
    """One session: the loop state, its journal handle, and its lock."""

    def __init__(self, session_id, space, config, seed, n0, journal_path):
        self.id = session_id
        self.space = space
        self.config = config
        self.seed = seed
        self.n0 = n0
        self.lock = threading.RLock()
        self.session = AskTellSession(space, config, seed=seed, initial_design_size=n0)
        self.journal_path = pathlib.Path(journal_path)
        self._journal = None
        self.failure = None
        # per-step dataset sizes, for slicing history out of the datasets
        self.boundaries = [0]

    # -- journaling ---------------------------------------------------------

    def open_journal(self):
        self.journal_path.parent.mkdir(parents=True, exist_ok=True)
        self._journal = self.journal_path.open("a", encoding="utf-8")

    def append_event(self, event):
        line = json.dumps(event, sort_keys=True, separators=(",", ":"))
        self._journal.write(line + "\n")
        self._journal.flush()
        os.fsync(self._journal.fileno())

    # -- state transitions (journal first, then apply) ----------------------

    def ensure_ask(self):
        if self.failure is not None:
            raise _conflict(f"session is in an error state: {self.failure}")
        pending = self.session.record().pending_ask
        if pending is not None:
            return pending
        points = self.session.ask()
        self.append_event({"event": "asked", "points": points.tolist()})
        return points

    def apply_tell(self, observations):
        if self.failure is not None:
            raise _conflict(f"session is in an error state: {self.failure}")
        pending = self.session.record().pending_ask
        if pending is None:
            raise _conflict("no pending ask; GET /ask first (or a racing tell won)")
        tags = self.session.tags
        if set(observations) != set(tags):
            raise _bad_request(
                f"observations must carry tags {sorted(tags)}, got "
                f"{sorted(observations)}",
                field="observations",
            )
        datasets = {}
        for tag in tags:
            try:
                column = np.asarray(observations[tag], dtype=float).reshape(-1, 1)
            except (TypeError, ValueError):
                raise _bad_request(f"observations for {tag!r} must be numbers", field=tag)
            if column.shape[0] != pending.shape[0]:
                raise _bad_request(
                    f"expected {pending.shape[0]} rows for tag {tag!r}, got "
                    f"{column.shape[0]}",
                    field=tag,
                )
            try:
                datasets[tag] = Dataset(pending, column)
            except AskoptError as exc:
                raise _bad_request(str(exc), field=tag)
        data = TaggedDatasets(datasets)
        # dry-run validation so a journaled told event always applies cleanly
        self.session._validate_tell(data)
        self.append_event({
            "event": "told",
            "observations": {tag: observations[tag] for tag in tags},
        })
        try:
            self.session.tell(data)
        except ModelFitError as exc:
            self.failure = str(exc)
            self.append_event({"event": "error", "message": str(exc)})
            raise ServiceError(500, "model-fit-failed", str(exc))
        self.boundaries.append(self.session.datasets[tags[0]].size)
        return self.session.record()

    # -- views ---------------------------------------------------------------

    def state_view(self):
        record = self.session.record()
        pending = record.pending_ask
        if self.failure is not None:
            status = "error"
        elif pending is not None:
            status = "awaiting-tell"
        else:
            status = "ready"
        return {
            "id": self.id,
            "status": status,
            "step_index": record.step_index,
            "tags": list(self.session.tags),
            "space": self.space.to_json(),
            "rule": self.config.to_json(),
            "seed": self.seed,
            "pending_ask": None if pending is None else pending.tolist(),
            "best_objective": record.best_objective(),
            "error": self.failure,
        }

    def history_view(self):
        datasets = self.session.datasets
        steps = []
        if datasets is not None:
            tags = self.session.tags
            points = datasets[tags[0]].query_points
            objective = datasets[tags[0]].observations[:, 0]
            running = np.minimum.accumulate(objective)
            for step, (start, stop) in enumerate(
                zip(self.boundaries, self.boundaries[1:])
            ):
                steps.append({
                    "step": step,
                    "query_points": points[start:stop].tolist(),
                    "observations": {
                        tag: datasets[tag].observations[start:stop, 0].tolist()
                        for tag in tags
                    },
                    "best_so_far": float(running[stop - 1]),
                })
        return {"id": self.id, "steps": steps}


def _parse_create_body(body):
    if not isinstance(body, dict):
        raise _bad_request("request body must be a JSON object")
    if "space" not in body:
        raise _bad_request("missing space", field="space")
    space_json = body["space"]
    if not isinstance(space_json, dict) or not {"lower", "upper"} <= set(space_json):
        raise _bad_request("space must be {lower: [...], upper: [...]}", field="space")
    space = BoxSpace(
        np.asarray(space_json["lower"], dtype=float),
        np.asarray(space_json["upper"], dtype=float),
    )
    rule_json = body.get("rule")
    config = RuleConfig() if rule_json is None else RuleConfig.from_json(rule_json)
    seed = body.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise _bad_request("seed must be an integer", field="seed")
    n0 = body.get("n0")
    if n0 is not None and (not isinstance(n0, int) or isinstance(n0, bool) or n0 < 1):
        raise _bad_request("n0 must be a positive integer", field="n0")
    return space, config, seed, n0


class SessionStore:
    """All live sessions plus the journal directory they persist to."""

    def __init__(self, data_dir):
        self.data_dir = pathlib.Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._sessions = {}

    def _journal_path(self, session_id):
        return self.data_dir / f"{session_id}.jsonl"

    def create(self, body):
        space, config, seed, n0 = _parse_create_body(body)
        with self._lock:
            while True:
                session_id = secrets.token_urlsafe(_ID_BYTES)
                if session_id not in self._sessions and not self._journal_path(
                    session_id
                ).exists():
                    break
            live = _LiveSession(
                session_id, space, config, seed, n0, self._journal_path(session_id)
            )
            live.open_journal()
            live.append_event({
                "event": "created",
                "id": session_id,
                "space": space.to_json(),
                "rule": config.to_json(),
                "seed": seed,
                "n0": n0,
            })
            self._sessions[session_id] = live
        return live

    def get(self, session_id):
        with self._lock:
            live = self._sessions.get(session_id)
            if live is None:
                live = self._replay_locked(session_id)
                if live is None:
                    raise _not_found(session_id)
                self._sessions[session_id] = live
        return live

    def _replay_locked(self, session_id):
        path = self._journal_path(session_id)
        if not path.exists():
            return None
        events = replay_events(path)
        if not events or events[0].get("event") != "created":
            return None
        return rebuild_session(session_id, events, path)


def replay_events(path):
    """Read journal events, dropping a torn final line from a crash."""
    events = []
    raw = pathlib.Path(path).read_text(encoding="utf-8").split("\n")
    raw = [line for line in raw if line != ""]
    for index, line in enumerate(raw):
        try:
            events.append(json.loads(line))
        except json.JSONDecodeError:
            if index == len(raw) - 1:
                break
            raise
    return events


def rebuild_session(session_id, events, journal_path):
    """Fold the journal into a fresh session; pure function of the events."""
    created = events[0]
    space = BoxSpace.from_json(created["space"])
    config = RuleConfig.from_json(created["rule"])
    live = _LiveSession(
        session_id, space, config, created["seed"], created.get("n0"), journal_path
    )
    for event in events[1:]:
        kind = event.get("event")
        if kind == "asked":
            live.session._pending = np.asarray(event["points"], dtype=float)
        elif kind == "told":
            pending = live.session.record().pending_ask
            observations = event["observations"]
            data = TaggedDatasets({
                tag: Dataset(
                    pending, np.asarray(observations[tag], dtype=float).reshape(-1, 1)
                )
                for tag in live.session.tags
            })
            try:
                live.session.tell(data)
            except AskoptError as exc:
                live.failure = str(exc)
                break
            live.boundaries.append(
                live.session.datasets[live.session.tags[0]].size
            )
        elif kind == "error":
            live.failure = event.get("message")
    live.open_journal()
    return live


def create_app(data_dir):
    """Build the FastAPI app around a journal directory."""
    store = SessionStore(data_dir)
    app = FastAPI(title="askopt session service", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.exception_handler(ServiceError)
    async def handle_service_error(_request, exc):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(AskoptError)
    async def handle_askopt_error(_request, exc):
        field = getattr(exc, "field", None)
        return JSONResponse(
            status_code=400,
            content={"code": "invalid-request", "message": str(exc), "field": field},
        )

    @app.exception_handler(RequestValidationError)
    async def handle_request_error(_request, exc):
        errors = exc.errors()
        field = None
        if errors and errors[0].get("loc"):
            field = ".".join(str(part) for part in errors[0]["loc"] if part != "body")
        message = errors[0].get("msg", "invalid request body") if errors else "invalid request body"
        return JSONResponse(
            status_code=400,
            content={"code": "invalid-request", "message": message, "field": field or None},
        )

    # handlers are sync on purpose: FastAPI runs them in its threadpool, so a
    # slow refit cannot stall the event loop and tells can genuinely race
    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)):
        live = store.create(body)
        return {"id": live.id, "tags": list(live.session.tags)}

    @app.get("/sessions/{session_id}/ask")
    def get_ask(session_id: str):
        live = store.get(session_id)
        with live.lock:
            points = live.ensure_ask()
            return {
                "points": points.tolist(),
                "step_index": live.session.step_index,
            }

    @app.post("/sessions/{session_id}/tell")
    def post_tell(session_id: str, body: dict = Body(...)):
        if "observations" not in body:
            raise _bad_request("body must be {observations: {tag: [...]}}",
                               field="observations")
        observations = body["observations"]
        if not isinstance(observations, dict):
            raise _bad_request("observations must map tags to value lists",
                               field="observations")
        live = store.get(session_id)
        with live.lock:
            record = live.apply_tell(observations)
            return {
                "step_index": record.step_index,
                "best_objective": record.best_objective(),
            }

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        live = store.get(session_id)
        with live.lock:
            return live.state_view()

    @app.get("/sessions/{session_id}/history")
    def get_history(session_id: str):
        live = store.get(session_id)
        with live.lock:
            return live.history_view()

    return app
