"""HTTP facade for the interactive planner: instance catalog, async solve
jobs, and exact what-if evaluation of manual swaps."""
from __future__ import annotations

import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .assignment import build_assignment, exact_swap_delta, swap_components
from .instances import InstanceError, ProblemInstance, line_instance, load_instance
from .mflp import MflpSolution, mflp_brute_force, solve_mflp, validate_pins
from .policy import PolicySelector, init_params
from .swap_search import EpisodeConfig, GreedyDeltaSelector

EPISODE_METHODS = ("drl", "greedy")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field_path: str | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.field_path = field_path
        super().__init__(message)

    def body(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.field_path:
            out["field"] = self.field_path
        return out


class SolveRequest(BaseModel):
    instance: str | None = None  # catalog id
    inline: dict | None = None  # full instance JSON document
    budgets: dict[str, int] | None = None
    method: str = "drl"
    steps: int | None = None
    pinned: dict[str, list[int]] = {}
    seed: int = 0


class WhatIfRequest(BaseModel):
    solution: str
    type: str
    insert: int
    remove: int


@dataclass
class Job:
    job_id: str
    status: str = "queued"  # queued -> running -> done | failed
    result: MflpSolution | None = None
    error: str | None = None
    instance: ProblemInstance | None = None
    pinned: dict[str, set[int]] = field(default_factory=dict)


class JobStore:
    def __init__(self, max_workers: int = 2):
        self.jobs: dict[str, Job] = {}
        self.lock = threading.Lock()
        self.pool = ThreadPoolExecutor(max_workers=max_workers)
        self._ids = itertools.count(1)

    def new_job(self, instance: ProblemInstance, pinned) -> Job:
        with self.lock:
            job = Job(job_id=f"job-{next(self._ids)}", instance=instance, pinned=pinned)
            self.jobs[job.job_id] = job
            return job

    def get(self, job_id: str) -> Job | None:
        with self.lock:
            return self.jobs.get(job_id)

    def shutdown(self):
        self.pool.shutdown(wait=False, cancel_futures=True)


def _instance_from_inline(doc: dict) -> ProblemInstance:
    import json
    import tempfile

    # reuse the file loader so inline documents face the same validation
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
        json.dump(doc, f)
        path = f.name
    try:
        return load_instance(path)
    finally:
        Path(path).unlink(missing_ok=True)


def _with_budgets(instance: ProblemInstance, budgets: dict[str, int]) -> ProblemInstance:
    unknown = [k for k in budgets if k not in instance.demands]
    if unknown:
        raise ApiError(400, "unknown_type", f"no demand data for type(s) {unknown}",
                       "budgets")
    demands = {k: instance.demands[k] for k in budgets}
    try:
        return ProblemInstance(
            positions=instance.positions,
            metric=instance.metric,
            demands=demands,
            budgets=budgets,
        )
    except InstanceError as exc:
        raise ApiError(400, "invalid_budgets", str(exc), exc.field_path) from exc


def _run_job(job: Job, method: str, steps: int | None, seed: int):
    job.status = "running"
    try:
        instance = job.instance
        if method == "bf":
            job.result = mflp_brute_force(instance)
        else:
            selector = (
                GreedyDeltaSelector()
                if method == "greedy"
                else PolicySelector(init_params(seed=0), mode="greedy")
            )
            max_p = max(instance.budgets.values())
            k = steps if steps is not None else 3 * max_p
            job.result = solve_mflp(
                instance,
                selector,
                EpisodeConfig(max_steps=k, seed=seed),
                pinned=job.pinned,
            )
        job.status = "done"
    except Exception as exc:  # surfaced through the job status
        job.status = "failed"
        job.error = str(exc)


def create_app(
    instances_dir: str | None = None,
    extra_instances: dict[str, ProblemInstance] | None = None,
    max_workers: int = 2,
) -> FastAPI:
    catalog: dict[str, ProblemInstance] = {"line4": line_instance()}
    if instances_dir:
        for path in sorted(Path(instances_dir).glob("*.json")):
            catalog[path.stem] = load_instance(path)
    if extra_instances:
        catalog.update(extra_instances)
    store = JobStore(max_workers=max_workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        store.shutdown()

    app = FastAPI(title="facloc planning service", lifespan=lifespan)
    app.state.store = store
    app.state.catalog = catalog

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "invalid_request", "message": str(exc.errors())},
        )

    @app.get("/instances")
    def list_instances():
        # full documents included so map clients need no second endpoint
        return [
            {
                "id": key,
                "n": inst.n,
                "metric": inst.metric,
                "budgets": dict(inst.budgets),
                "instance": inst.to_json_dict(),
            }
            for key, inst in catalog.items()
        ]

    @app.post("/solve", status_code=202)
    def solve(req: SolveRequest):
        if req.inline is not None:
            try:
                instance = _instance_from_inline(req.inline)
            except InstanceError as exc:
                raise ApiError(400, "invalid_instance", str(exc), exc.field_path)
        elif req.instance is not None:
            instance = catalog.get(req.instance)
            if instance is None:
                raise ApiError(404, "unknown_instance",
                               f"no instance named {req.instance!r}", "instance")
        else:
            raise ApiError(400, "invalid_request",
                           "either 'instance' or 'inline' is required", "instance")
        if req.budgets:
            instance = _with_budgets(instance, req.budgets)
        if req.method not in ("bf", *EPISODE_METHODS):
            raise ApiError(400, "unknown_method",
                           f"method must be one of {('bf', *EPISODE_METHODS)}", "method")
        try:
            pins = validate_pins(instance, req.pinned)
        except ValueError as exc:
            raise ApiError(400, "invalid_pins", str(exc), "pinned") from exc
        if pins and req.method == "bf":
            raise ApiError(400, "invalid_pins", "pins require method drl or greedy",
                           "method")
        if req.steps is not None and req.steps < 0:
            raise ApiError(400, "invalid_request", "steps must be >= 0", "steps")
        job = store.new_job(instance, pins)
        store.pool.submit(_run_job, job, req.method, req.steps, req.seed)
        return {"job_id": job.job_id, "status": "accepted"}

    @app.get("/solutions/{job_id}")
    def get_solution(job_id: str):
        job = store.get(job_id)
        if job is None:
            raise ApiError(404, "unknown_job", f"no job named {job_id!r}")
        if job.status in ("queued", "running"):
            raise ApiError(425, "not_ready", f"job is {job.status}")
        if job.status == "failed":
            raise ApiError(500, "solve_failed", job.error or "unknown failure")
        return {
            "job_id": job.job_id,
            "status": job.status,
            "solution": job.result.to_json_dict(include_timings=True),
        }

    @app.post("/whatif")
    def whatif(req: WhatIfRequest):
        job = store.get(req.solution)
        if job is None or job.status != "done":
            raise ApiError(404, "unknown_solution",
                           f"no completed solution named {req.solution!r}")
        instance = job.instance
        placements = job.result.placements
        if req.type not in placements:
            raise ApiError(409, "invalid_swap", f"unknown type {req.type!r}", "type")
        if not 0 <= req.insert < instance.n or not 0 <= req.remove < instance.n:
            raise ApiError(409, "invalid_swap", "node id out of range")
        if req.remove not in placements[req.type]:
            raise ApiError(409, "invalid_swap",
                           f"node {req.remove} holds no {req.type!r} facility", "remove")
        occupied = {v for ids in placements.values() for v in ids}
        if req.insert in occupied:
            raise ApiError(409, "invalid_swap",
                           f"node {req.insert} is already occupied", "insert")
        # evaluate against a frozen copy; the stored solution is never touched
        state = build_assignment(instance, req.type, placements[req.type])
        if state.p >= 2:
            comp = swap_components(state, req.insert, req.remove)
            gain, loss, extra, delta = comp.gain, comp.loss, comp.extra, comp.delta
        else:
            delta = exact_swap_delta(state, req.insert, req.remove)
            h = instance.demands[req.type]
            di = instance.dist_to_all(req.insert)
            gain = float(np.dot(h, np.maximum(0.0, state.d1 - di)))
            extra = 0.0
            loss = delta + gain  # keeps delta = loss - gain - extra
        return {
            "gain": gain,
            "loss": loss,
            "extra": extra,
            "delta": delta,
            "new_total_ac": job.result.total_ac + delta,
        }

    return app
