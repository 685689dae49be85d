"""HTTP/JSON suggestion service for interactive layout tools.

Sessions hold a problem plus a saved-design timeline; suggestion jobs run on
a bounded worker pool and stream results through an append-only per-job
event log.  Event delivery is ordered and resumable: a reader passes
``?afterSeq=N`` to continue where a dropped connection stopped.  A job ends
with a summary event.  Cancellation is cooperative and takes effect at
solver node boundaries (well under the 250 ms target).

Environment: ``PORT`` (serve script), ``WORKERS`` worker pool size,
``SNAPSHOT_PATH`` optional JSON snapshot written on shutdown and reloaded
on startup.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any, Literal, Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from . import bnb, diversifier as dv, jsonio
from .model import LayoutProblem, LayoutSolution, validate_problem, validate_solution


class SuggestRequest(BaseModel):
    mode: Literal["explore", "complete", "nearby", "constrained"]
    k: int = Field(default=5, ge=1, le=50)
    radius: Optional[int] = Field(default=2, ge=0)
    seedSolutionId: Optional[str] = None
    timeLimit: Optional[float] = Field(default=None, gt=0)


class SaveRequest(BaseModel):
    solution: dict
    origin: Literal["user", "optimiser", "edited"]


class _Job:
    def __init__(self, job_id: str, mode: str):
        self.id = job_id
        self.mode = mode
        self.cancel = bnb.CancelToken()
        self.cond = threading.Condition()
        self.events: list[dict] = []
        self.done = False

    def emit(self, event: dict) -> None:
        with self.cond:
            event["seq"] = len(self.events)
            self.events.append(event)
            if event.get("type") == "summary":
                self.done = True
            self.cond.notify_all()

    def finish(self, status: str, count: int, bound: Optional[float] = None) -> None:
        self.emit({"type": "summary", "status": status, "bound": bound, "count": count})


class _Session:
    def __init__(self, session_id: str, problem: LayoutProblem):
        self.id = session_id
        self.problem = problem
        self.saved: list[dict] = []
        self.jobs: dict[str, _Job] = {}
        self.active_job: Optional[_Job] = None
        self.lock = threading.Lock()
        self._saved_seq = 0

    def next_saved_id(self) -> str:
        self._saved_seq += 1
        return f"d{self._saved_seq}"


class ServiceState:
    def __init__(self, workers: Optional[int] = None, snapshot_path: Optional[str] = None):
        if workers is None:
            workers = int(os.environ.get("WORKERS", "2"))
        self.executor = ThreadPoolExecutor(max_workers=max(1, workers))
        self.snapshot_path = snapshot_path if snapshot_path is not None \
            else os.environ.get("SNAPSHOT_PATH") or None
        self.sessions: dict[str, _Session] = {}
        self.lock = threading.Lock()
        self._session_seq = 0
        self._job_seq = 0

    def new_session(self, problem: LayoutProblem) -> _Session:
        with self.lock:
            self._session_seq += 1
            session = _Session(f"s{self._session_seq}", problem)
            self.sessions[session.id] = session
            return session

    def new_job_id(self) -> str:
        with self.lock:
            self._job_seq += 1
            return f"j{self._job_seq}"

    # -- snapshotting -------------------------------------------------------

    def save_snapshot(self) -> None:
        if not self.snapshot_path:
            return
        payload = {
            "sessions": [
                {
                    "id": s.id,
                    "problem": jsonio.problem_to_dict(s.problem),
                    "saved": s.saved,
                }
                for s in self.sessions.values()
            ]
        }
        Path(self.snapshot_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    def load_snapshot(self) -> None:
        if not self.snapshot_path or not Path(self.snapshot_path).exists():
            return
        data = json.loads(Path(self.snapshot_path).read_text(encoding="utf-8"))
        for entry in data.get("sessions", []):
            session = _Session(entry["id"], jsonio.problem_from_dict(entry["problem"]))
            session.saved = entry.get("saved", [])
            session._saved_seq = len(session.saved)
            self.sessions[session.id] = session
            seq = int(entry["id"].lstrip("s") or 0)
            self._session_seq = max(self._session_seq, seq)


def create_app(state: Optional[ServiceState] = None) -> FastAPI:
    service = state or ServiceState()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        service.load_snapshot()
        yield
        service.save_snapshot()
        service.executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="gridlayout suggestion service", version="0.1.0",
                  lifespan=lifespan)
    app.state.service = service

    def get_session(session_id: str) -> _Session:
        session = service.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    def parse_problem(payload: Any) -> LayoutProblem:
        if not isinstance(payload, dict):
            raise HTTPException(status_code=422, detail={"violations": [
                {"code": "BadPayload", "subject": "$", "message": "problem must be an object"}]})
        try:
            problem = jsonio.problem_from_dict(payload)
        except jsonio.ParseError as exc:
            raise HTTPException(status_code=422, detail={"violations": [
                {"code": "SchemaViolation", "subject": exc.path or "$", "message": str(exc)}]})
        violations = validate_problem(problem)
        if violations:
            raise HTTPException(status_code=422, detail={"violations": [
                {"code": v.code, "subject": v.subject, "message": v.message}
                for v in violations]})
        return problem

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        problem = parse_problem(body.get("problem"))
        session = service.new_session(problem)
        return {"sessionId": session.id}

    @app.put("/sessions/{session_id}/problem")
    def replace_problem(session_id: str, body: dict):
        session = get_session(session_id)
        problem = parse_problem(body.get("problem", body))
        with session.lock:
            if session.active_job is not None:
                session.active_job.cancel.set()
                session.active_job = None
            session.problem = problem
        return {"sessionId": session.id}

    def run_job(session: _Session, job: _Job, request: SuggestRequest,
                problem: LayoutProblem, seed: Optional[LayoutSolution]) -> None:
        emitted = 0

        def on_solution(sol: LayoutSolution) -> None:
            nonlocal emitted
            if validate_solution(problem, sol):
                return  # never stream an invalid layout
            doc = jsonio.solution_to_dict(sol)
            job.emit({"type": "solution", "solution": doc, "stats": doc["stats"]})
            emitted += 1

        per_solve = 5.0
        if request.timeLimit:
            per_solve = max(0.5, min(5.0, request.timeLimit / max(2, request.k)))
        cfg = dv.DiversifyConfig(count=request.k, per_solve=per_solve,
                                 total_time=request.timeLimit,
                                 cancel=job.cancel, on_solution=on_solution)
        status = "completed"
        try:
            if request.mode == "nearby":
                dv.nearby(problem, seed, request.radius or 2, request.k, cfg)
            else:
                # explore, constrained and complete share the sweep; locks and
                # preferences already live in the session problem.
                dv.diversify(problem, cfg)
        except dv.InfeasibleProblem:
            status = "infeasible"
        except dv.TimeBudgetExhausted:
            status = "timeout"
        except Exception:
            status = "failed"
        if job.cancel.is_set():
            status = "cancelled"
        with session.lock:
            if session.active_job is job:
                session.active_job = None
        job.finish(status, emitted)

    @app.post("/sessions/{session_id}/suggest", status_code=202)
    def suggest(session_id: str, request: SuggestRequest):
        session = get_session(session_id)
        seed: Optional[LayoutSolution] = None
        if request.mode == "nearby":
            entry = next((s for s in session.saved if s["id"] == request.seedSolutionId), None)
            if entry is None:
                raise HTTPException(status_code=404,
                                    detail=f"unknown seed solution {request.seedSolutionId}")
            seed = jsonio.solution_from_dict(entry["solution"])
        with session.lock:
            if session.active_job is not None:
                raise HTTPException(status_code=409, detail="a job is already active")
            job = _Job(service.new_job_id(), request.mode)
            session.jobs[job.id] = job
            session.active_job = job
        problem = session.problem
        service.executor.submit(run_job, session, job, request, problem, seed)
        return {"jobId": job.id}

    @app.get("/sessions/{session_id}/jobs/{job_id}/events")
    def events(session_id: str, job_id: str, afterSeq: int = -1):
        session = get_session(session_id)
        job = session.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")

        def stream():
            cursor = afterSeq + 1
            while True:
                with job.cond:
                    while cursor >= len(job.events) and not job.done:
                        job.cond.wait(timeout=0.25)
                    chunk = job.events[cursor:]
                    done = job.done
                for event in chunk:
                    yield json.dumps(event) + "\n"
                cursor += len(chunk)
                if done and cursor >= len(job.events):
                    return

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.delete("/sessions/{session_id}/jobs/{job_id}", status_code=202)
    def cancel_job(session_id: str, job_id: str):
        session = get_session(session_id)
        job = session.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
        job.cancel.set()
        return {"jobId": job.id, "cancelled": True}

    @app.post("/sessions/{session_id}/saved", status_code=201)
    def save_design(session_id: str, request: SaveRequest):
        session = get_session(session_id)
        try:
            jsonio.solution_from_dict(request.solution)
        except jsonio.ParseError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        with session.lock:
            entry = {
                "id": session.next_saved_id(),
                "timestamp": time.time(),
                "origin": request.origin,
                "solution": request.solution,
            }
            session.saved.append(entry)
        return entry

    @app.get("/sessions/{session_id}/saved")
    def timeline(session_id: str):
        session = get_session(session_id)
        return {"saved": session.saved}

    @app.exception_handler(bnb.NumericalBreakdown)
    async def solver_breakdown(_request, exc: bnb.NumericalBreakdown):
        diagnostic = uuid.uuid4().hex[:12]
        return Response(
            content=json.dumps({"error": "solver breakdown", "diagnosticId": diagnostic,
                                "message": str(exc)}),
            status_code=500, media_type="application/json")

    return app


def serve() -> None:  # pragma: no cover - thin launcher
    import uvicorn

    port = int(os.environ.get("PORT", "8000"))
    uvicorn.run(create_app(), host="127.0.0.1", port=port)


if __name__ == "__main__":  # pragma: no cover
    serve()
