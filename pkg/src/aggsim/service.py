"""Local HTTP service exposing models, runs, stepping, and comparison.

The service is a thin adapter over the library: a run started here writes
the same log bytes as the CLI's run command.  Paused runs live in a
bounded registry (LRU, finished runs evicted first); each run is guarded
by a lock so step/control interleavings serialize per run.
"""

from __future__ import annotations

import threading
import uuid
from collections import OrderedDict

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from . import documents
from .criteria import compare as compare_op
from .engine import Run
from .errors import (
    AggsimError,
    PastTime,
    RunFinished,
    UnknownSymbol,
    UnknownTarget,
)

REGISTRY_CAPACITY = 64


class _RunEntry:
    def __init__(self, run: Run):
        self.run = run
        self.lock = threading.Lock()


class Registry:
    """Bounded LRU registry of runs; finished runs are evicted first."""

    def __init__(self, capacity: int = REGISTRY_CAPACITY):
        self.capacity = capacity
        self._runs: OrderedDict[str, _RunEntry] = OrderedDict()
        self._lock = threading.Lock()

    def add(self, run: Run) -> str:
        run_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._runs[run_id] = _RunEntry(run)
            self._evict()
        return run_id

    def get(self, run_id: str) -> _RunEntry:
        with self._lock:
            entry = self._runs.get(run_id)
            if entry is not None:
                self._runs.move_to_end(run_id)
        return entry

    def _evict(self):
        while len(self._runs) > self.capacity:
            victim = None
            for rid, entry in self._runs.items():  # LRU order
                if entry.run.finished:
                    victim = rid
                    break
            if victim is None:
                victim = next(iter(self._runs))
            del self._runs[victim]


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"code": code, "message": message}
    )


def create_app() -> FastAPI:
    app = FastAPI(title="aggsim")
    models: dict[str, dict] = {}
    registry = Registry()

    @app.exception_handler(AggsimError)
    async def _domain_error(request: Request, exc: AggsimError):
        if isinstance(exc, (PastTime, RunFinished)):
            return _error(409, type(exc).__name__, str(exc))
        if isinstance(exc, (UnknownTarget, UnknownSymbol)):
            return _error(400, type(exc).__name__, str(exc))
        return _error(400, type(exc).__name__, str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/models")
    def list_models():
        return {
            "models": [
                {"digest": d, "format": doc.get("format")}
                for d, doc in sorted(models.items())
            ]
        }

    @app.post("/models")
    def upload_model(doc: dict):
        findings = documents.validate_model_doc(doc)
        if findings:
            return _error(400, "ModelValidationError", "; ".join(findings))
        d = documents.model_doc_digest(doc)
        models[d] = doc
        return {"digest": d}

    @app.get("/models/{digest}")
    def get_model(digest: str):
        if digest not in models:
            return _error(404, "UnknownModel", f"no model {digest!r}")
        return models[digest]

    def _resolve_model_doc(body: dict):
        model = body.get("model")
        if isinstance(model, str):
            if model not in models:
                return None, _error(404, "UnknownModel", f"no model {model!r}")
            return models[model], None
        if isinstance(model, dict):
            return model, None
        return None, _error(400, "DocumentError", "body needs a model doc or digest")

    @app.post("/runs")
    def start_run(body: dict):
        model_doc, err = _resolve_model_doc(body)
        if err is not None:
            return err
        scenario_doc = body.get("scenario") or {}
        mode = body.get("mode", "full")
        if mode not in ("full", "paused"):
            return _error(400, "DocumentError", f"unknown mode {mode!r}")
        model = documents.model_from_doc(model_doc)
        scenario = documents.scenario_from_doc(scenario_doc)
        want = scenario_doc.get("model_digest")
        if want and want != documents.model_doc_digest(model_doc):
            return _error(
                400, "DigestMismatch", "scenario's model digest does not match"
            )
        run = Run(model, scenario, int(body.get("seed", 0)))
        if mode == "full":
            run.run_to_end()
        run_id = registry.add(run)
        return {
            "id": run_id,
            "finished": run.finished,
            "t": run.t,
            "header": run.header,
        }

    @app.post("/runs/{run_id}/step")
    def step_run(run_id: str):
        entry = registry.get(run_id)
        if entry is None:
            return _error(404, "UnknownRun", f"no run {run_id!r}")
        with entry.lock:
            entry.run.step()
            return {
                "finished": entry.run.finished,
                "t": entry.run.t,
                "records": len(entry.run.records),
            }

    @app.post("/runs/{run_id}/control")
    def control_run(run_id: str, body: dict):
        entry = registry.get(run_id)
        if entry is None:
            return _error(404, "UnknownRun", f"no run {run_id!r}")
        with entry.lock:
            entry.run.inject_control(
                float(body["t"]), body["target"], body["symbol"]
            )
        return {"ok": True}

    @app.post("/runs/{run_id}/monitoring")
    def monitoring_run(run_id: str, body: dict):
        entry = registry.get(run_id)
        if entry is None:
            return _error(404, "UnknownRun", f"no run {run_id!r}")
        with entry.lock:
            entry.run.ingest_monitoring(body.get("records", []))
        return {"ok": True}

    @app.get("/runs/{run_id}/log")
    def run_log(run_id: str, request: Request):
        entry = registry.get(run_id)
        if entry is None:
            return _error(404, "UnknownRun", f"no run {run_id!r}")
        start = int(request.query_params.get("from", 0))
        fmt = request.query_params.get("format", "json")
        with entry.lock:
            log = entry.run.log()
        records = [r for r in log.records if r["n"] > start]
        if fmt == "jsonl":
            lines = [documents.canonical_json(log.header)]
            lines += [documents.canonical_json(r) for r in records]
            return PlainTextResponse("\n".join(lines) + "\n")
        return {
            "header": log.header,
            "records": records,
            "finished": entry.run.finished,
            "next": records[-1]["n"] if records else start,
        }

    @app.post("/compare")
    def compare_endpoint(body: dict):
        model_doc, err = _resolve_model_doc(body)
        if err is not None:
            return err
        model = documents.model_from_doc(model_doc)
        scenarios = [
            documents.scenario_from_doc(s) for s in body.get("scenarios", [])
        ]
        if not scenarios:
            return _error(400, "DocumentError", "compare needs scenarios")
        criterion = documents.criterion_from_spec(body["criterion"])
        ranking = compare_op(model, scenarios, criterion, int(body.get("seed", 0)))
        return {
            "criterion": documents.criterion_to_spec(criterion),
            "seed": ranking.seed,
            "model_digest": ranking.model_digest,
            "ranking": [
                {"id": sid, "score": score} for sid, score in ranking.entries
            ],
        }

    return app
