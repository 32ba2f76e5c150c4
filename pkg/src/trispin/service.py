"""HTTP job service consumed by the web composer UI.

POST /api/jobs        submit a circuit (202 + job id)
GET  /api/jobs/{id}   job state/result
GET  /api/jobs        job listing
GET  /api/system      molecule profile
GET  /api/library     gate fidelities
GET  /api/builtins    built-in circuits
GET  /api/spectra/{id}  readout spectra of an emulate job

Jobs run on a bounded worker pool so submissions never block the API; the
store is append-only and survives restarts.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, field_validator

from .circuits import Circuit, builtin_circuits
from .engine import Job, JobStore, SystemProfile, run_job
from .gates import GATE_KINDS
from .pulses import NoiseConfig


class GateModel(BaseModel):
    kind: str
    qubits: list[int] = Field(min_length=1, max_length=3)
    angle: float | None = None

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, v):
        if v not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {v!r}")
        return v

    @field_validator("qubits")
    @classmethod
    def _valid_qubits(cls, v):
        if any(q not in (1, 2, 3) for q in v) or len(set(v)) != len(v):
            raise ValueError("qubits must be distinct indices in 1..3")
        return v


class CircuitModel(BaseModel):
    qubits: int = 3
    gates: list[GateModel] = []
    measure: list[bool] = Field(default=[True, True, True], min_length=3, max_length=3)

    @field_validator("qubits")
    @classmethod
    def _three(cls, v):
        if v != 3:
            raise ValueError("this machine has exactly 3 qubits")
        return v


class NoiseModel(BaseModel):
    relaxation_enabled: bool = True
    drift_hz_per_s: float = Field(default=0.0, ge=0.0)
    relax_during_pulses: bool = False
    polarization: float = Field(default=1e-5, gt=0.0, lt=0.5)


class JobRequest(BaseModel):
    circuit: CircuitModel
    mode: str = "simulate"
    noise: NoiseModel | None = None

    @field_validator("mode")
    @classmethod
    def _mode(cls, v):
        if v not in ("simulate", "emulate"):
            raise ValueError("mode must be 'simulate' or 'emulate'")
        return v


def create_app(profile: SystemProfile, store: JobStore,
               max_workers: int | None = None,
               frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="three-spin emulator", docs_url="/api/docs")
    executor = ThreadPoolExecutor(max_workers=max_workers or (os.cpu_count() or 2))
    jobs: dict[str, Job] = {}
    lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        detail = [{"loc": list(e.get("loc", ())), "msg": str(e.get("msg", "")),
                   "type": str(e.get("type", ""))} for e in exc.errors()]
        return JSONResponse(status_code=400, content={"detail": detail})

    def _execute(job: Job):
        with lock:
            job.status = "running"
        run_job(job, profile)
        with lock:
            store.append(job)
            if job.spectra is not None:
                store.save_spectra(job.id, job.spectra)

    @app.post("/api/jobs", status_code=202)
    def submit_job(req: JobRequest):
        gates = [(g.kind, tuple(g.qubits), g.angle) for g in req.circuit.gates]
        try:
            from .gates import Gate
            circuit = Circuit(tuple(Gate(k, q, a) for k, q, a in gates),
                              tuple(req.circuit.measure))
            if not any(circuit.measure):
                raise ValueError("at least one qubit must be measured")
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        noise = (NoiseConfig(**req.noise.model_dump())
                 if req.noise is not None else profile.noise)
        job = Job(circuit=circuit, mode=req.mode, noise=noise)
        with lock:
            jobs[job.id] = job
            store.append(job)
        executor.submit(_execute, job)
        return {"id": job.id, "status": "queued"}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        with lock:
            job = jobs.get(job_id)
            if job is not None and job.status in ("done", "failed"):
                record = store.get(job_id)
                if record is not None:
                    return record
            if job is not None:
                return job.to_dict()
        record = store.get(job_id)
        if record is None:
            return JSONResponse(status_code=404, content={"detail": "no such job"})
        return record

    @app.get("/api/jobs")
    def list_jobs():
        return store.list_ids()

    @app.get("/api/system")
    def system():
        spec = profile.spec
        return {
            "chemical_shifts_hz": list(spec.chemical_shifts_hz),
            "j_couplings_hz": list(spec.j_couplings_hz),
            "t1_s": spec.t1_s,
            "t2_s": spec.t2_s,
            "larmor_mhz": spec.larmor_mhz,
            "polarization": profile.noise.polarization,
            "qubits": 3,
        }

    @app.get("/api/library")
    def library():
        if profile.library is None:
            return []
        return profile.library.manifest()

    @app.get("/api/builtins")
    def builtins():
        return [{"name": b.name, "description": b.description,
                 "circuit": b.circuit.to_dict(),
                 "ideal_probabilities": list(b.ideal_probabilities)}
                for b in builtin_circuits()]

    @app.get("/api/spectra/{job_id}")
    def spectra(job_id: str):
        data = store.get_spectra(job_id)
        if data is None:
            return JSONResponse(status_code=404,
                                content={"detail": "no spectra for this job"})
        return data

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True),
                  name="ui")
    return app


def serve(profile: SystemProfile, data_dir: str | Path, host: str = "127.0.0.1",
          port: int = 8000, frontend_dir: str | Path | None = None):
    """Run the service until interrupted."""
    import uvicorn

    store = JobStore(data_dir)
    app = create_app(profile, store, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
