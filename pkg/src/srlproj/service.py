"""HTTP facade serving annotation tasks and persisting responses.

State lives in a single append-only JSON Lines log; an in-memory index is
rebuilt from it on startup, so a restart (or crash) reconstructs the exact
server state. Writes are serialized through one lock and use optimistic
concurrency: every (task, coder) assignment carries a version that increments
on each accepted write, and a submit with a stale expected_version is logged
but rejected with a conflict. Nothing is ever overwritten.

Endpoints (JSON bodies):
  GET  /api/tasks/next?coder=ID   next open task for the coder (204 when done)
  GET  /api/tasks/{id}            task detail
  POST /api/tasks/{id}/submit     {coder_id, expected_version, response}
  GET  /api/progress              per-coder {open, in_progress, submitted}
plus static file serving for the built annotation UI under /.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from http import HTTPStatus
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Sequence

from .curation import (AnnotationResponse, AnnotationTask, CurationError,
                       response_from_record, validate_response)

OPEN = "open"
IN_PROGRESS = "in_progress"
SUBMITTED = "submitted"


@dataclass
class Assignment:
    task_id: str
    coder_id: str
    state: str = OPEN
    version: int = 0
    response: AnnotationResponse | None = None


@dataclass
class TaskStore:
    """In-memory index over the append-only response log."""

    tasks: Sequence[AnnotationTask]
    coders: Sequence[str]
    log_path: Path
    assignments: dict[tuple[str, str], Assignment] = field(default_factory=dict)

    def __post_init__(self):
        self.log_path = Path(self.log_path)
        self._by_id = {t.task_id: t for t in self.tasks}
        self._lock = threading.Lock()
        for task in self.tasks:
            for coder in self.coders:
                self.assignments[(task.task_id, coder)] = Assignment(
                    task.task_id, coder)
        if self.log_path.exists():
            self._replay()

    # -- persistence ------------------------------------------------------

    def _replay(self) -> None:
        with open(self.log_path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                if not entry.get("accepted", True):
                    continue
                assignment = self.assignments.get(
                    (entry["task_id"], entry["coder_id"]))
                if assignment is None:
                    continue
                assignment.version = entry["version"]
                if entry["event"] == "assign":
                    assignment.state = IN_PROGRESS
                elif entry["event"] == "submit":
                    assignment.state = SUBMITTED
                    assignment.response = response_from_record(entry["response"])

    def _append(self, entry: dict) -> None:
        with open(self.log_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(entry, ensure_ascii=False) + "\n")
            handle.flush()

    # -- operations -------------------------------------------------------

    def task(self, task_id: str) -> AnnotationTask | None:
        return self._by_id.get(task_id)

    def next_task(self, coder_id: str) -> tuple[AnnotationTask, int] | None:
        """Lowest-ordered open task for the coder; idempotent while the
        served task stays unsubmitted."""
        if coder_id not in self.coders:
            raise CurationError(f"unknown coder {coder_id!r}")
        with self._lock:
            for task in self.tasks:
                assignment = self.assignments[(task.task_id, coder_id)]
                if assignment.state == IN_PROGRESS:
                    return task, assignment.version
                if assignment.state == OPEN:
                    assignment.state = IN_PROGRESS
                    assignment.version += 1
                    self._append({
                        "event": "assign",
                        "task_id": task.task_id,
                        "coder_id": coder_id,
                        "version": assignment.version,
                        "accepted": True,
                    })
                    return task, assignment.version
        return None

    def submit(self, task_id: str, coder_id: str, expected_version: int,
               response: AnnotationResponse) -> int:
        """Validate and persist one response; returns the new version.

        Raises VersionConflict on a stale expected_version (the attempt is
        still logged, marked not accepted) and CurationError on schema
        violations.
        """
        task = self._by_id.get(task_id)
        if task is None:
            raise CurationError(f"unknown task {task_id!r}")
        if coder_id not in self.coders:
            raise CurationError(f"unknown coder {coder_id!r}")
        validate_response(response, task)
        with self._lock:
            assignment = self.assignments[(task_id, coder_id)]
            if assignment.version != expected_version or \
                    assignment.state != IN_PROGRESS:
                self._append({
                    "event": "submit",
                    "task_id": task_id,
                    "coder_id": coder_id,
                    "version": assignment.version,
                    "expected_version": expected_version,
                    "accepted": False,
                    "response": response.to_record(),
                })
                raise VersionConflict(
                    f"assignment {task_id}/{coder_id} is at version "
                    f"{assignment.version} ({assignment.state}), "
                    f"submit expected {expected_version}")
            assignment.version += 1
            assignment.state = SUBMITTED
            assignment.response = response
            self._append({
                "event": "submit",
                "task_id": task_id,
                "coder_id": coder_id,
                "version": assignment.version,
                "accepted": True,
                "response": response.to_record(),
            })
            return assignment.version

    def progress(self) -> dict[str, dict[str, int]]:
        counts = {coder: {OPEN: 0, IN_PROGRESS: 0, SUBMITTED: 0}
                  for coder in self.coders}
        with self._lock:
            for assignment in self.assignments.values():
                counts[assignment.coder_id][assignment.state] += 1
        return counts

    def responses(self) -> list[AnnotationResponse]:
        with self._lock:
            return [a.response for a in self.assignments.values()
                    if a.response is not None]


class VersionConflict(CurationError):
    """Optimistic-concurrency check failed; no state was changed."""


_TASK_ROUTE = re.compile(r"^/api/tasks/([^/]+)$")
_SUBMIT_ROUTE = re.compile(r"^/api/tasks/([^/]+)/submit$")


class AnnotationHandler(SimpleHTTPRequestHandler):
    """Routes /api/* to the TaskStore and serves static files otherwise."""

    store: TaskStore  # set by make_server
    protocol_version = "HTTP/1.1"

    def log_message(self, format, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length) if length else b"{}"
        return json.loads(raw.decode("utf-8"))

    def do_GET(self):
        path, _, query = self.path.partition("?")
        if path == "/api/progress":
            self._send_json(HTTPStatus.OK, self.store.progress())
            return
        if path == "/api/tasks/next":
            params = dict(p.split("=", 1) for p in query.split("&") if "=" in p)
            coder = params.get("coder", "")
            try:
                result = self.store.next_task(coder)
            except CurationError as exc:
                self._send_json(HTTPStatus.BAD_REQUEST, {"error": str(exc)})
                return
            if result is None:
                self.send_response(HTTPStatus.NO_CONTENT)
                self.send_header("Content-Length", "0")
                self.end_headers()
                return
            task, version = result
            self._send_json(HTTPStatus.OK,
                            {"task": task.to_record(), "version": version})
            return
        match = _TASK_ROUTE.match(path)
        if match:
            task = self.store.task(match.group(1))
            if task is None:
                self._send_json(HTTPStatus.NOT_FOUND,
                                {"error": f"unknown task {match.group(1)!r}"})
                return
            self._send_json(HTTPStatus.OK, {"task": task.to_record()})
            return
        super().do_GET()

    def do_POST(self):
        match = _SUBMIT_ROUTE.match(self.path)
        if not match:
            self._send_json(HTTPStatus.NOT_FOUND, {"error": "unknown endpoint"})
            return
        task_id = match.group(1)
        try:
            body = self._read_json()
            response = response_from_record(
                {**body.get("response", {}), "task_id": task_id,
                 "coder_id": body.get("coder_id", "")})
            version = self.store.submit(
                task_id, body.get("coder_id", ""),
                int(body.get("expected_version", -1)), response)
        except VersionConflict as exc:
            self._send_json(HTTPStatus.CONFLICT, {"error": str(exc)})
            return
        except (CurationError, KeyError, ValueError, json.JSONDecodeError) as exc:
            self._send_json(HTTPStatus.BAD_REQUEST, {"error": str(exc)})
            return
        self._send_json(HTTPStatus.OK, {"version": version})


def make_server(store: TaskStore, host: str = "127.0.0.1", port: int = 0,
                static_dir: Path | None = None) -> ThreadingHTTPServer:
    directory = str(static_dir) if static_dir else None

    class Handler(AnnotationHandler):
        def __init__(self, *args, **kwargs):
            if directory:
                kwargs["directory"] = directory
            super().__init__(*args, **kwargs)

    Handler.store = store
    return ThreadingHTTPServer((host, port), Handler)
