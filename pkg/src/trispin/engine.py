"""Job orchestration: simulate/emulate execution, marginalization, and the
append-only job store backing the HTTP service."""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .circuits import Circuit, simulate_ideal
from .compiler import FrameState, PulsePlay, Delay, compile_circuit
from .library import PulseLibrary
from .pps import PpsConfig, default_pps_config, prepare_pps
from .pulses import NoiseConfig, evolve, free_evolution, quantize
from .readout import measure_diagonal
from .spincore import MoleculeSpec, build_drift_hamiltonian


@dataclass
class SystemProfile:
    """Everything a job needs: the molecule, the pulse library, preparation
    defaults, and the noise defaults jobs inherit."""

    spec: MoleculeSpec = field(default_factory=MoleculeSpec)
    library: PulseLibrary | None = None
    pps_config: PpsConfig | None = None
    noise: NoiseConfig = field(default_factory=NoiseConfig)

    def require_library(self) -> PulseLibrary:
        if self.library is None:
            raise RuntimeError("no pulse library loaded; emulate mode needs one")
        return self.library

    def resolved_pps_config(self) -> PpsConfig:
        if self.pps_config is not None:
            return self.pps_config
        return default_pps_config(self.spec, self.noise)


@dataclass
class Job:
    circuit: Circuit
    mode: str
    noise: NoiseConfig
    id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    status: str = "queued"
    result: dict | None = None
    error: str | None = None
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished_at: str | None = None
    # readout spectra of emulate jobs; persisted separately from the record
    spectra: list | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "mode": self.mode,
            "circuit": self.circuit.to_dict(),
            "result": self.result,
            "error": self.error,
            "created_at": self.created_at,
            "finished_at": self.finished_at,
        }


def marginalize(probabilities, measure_flags) -> np.ndarray:
    """Sum out unmeasured qubits; the result enumerates the kept qubits'
    bit patterns in order."""
    p = np.asarray(probabilities, dtype=float)
    flags = tuple(bool(f) for f in measure_flags)
    if p.shape != (8,):
        raise ValueError("need 8 probabilities")
    if not any(flags):
        raise ValueError("at least one qubit must be measured")
    kept = [k for k in range(3) if flags[k]]
    out = np.zeros(2 ** len(kept))
    for i in range(8):
        bits = [(i >> (2 - k)) & 1 for k in range(3)]
        j = 0
        for k in kept:
            j = (j << 1) | bits[k]
        out[j] += p[i]
    return out


def basis_labels(measure_flags) -> list[str]:
    kept = [k for k in range(3) if measure_flags[k]]
    labels = []
    for j in range(2 ** len(kept)):
        bits = format(j, f"0{len(kept)}b")
        labels.append(bits)
    return labels


def run_job(job: Job, profile: SystemProfile) -> Job:
    """Execute a job in place: ideal statevector for simulate mode, the full
    pulse-level pipeline (PPS preparation, compiled schedule, relaxation,
    spectral readout) for emulate mode."""
    try:
        t_begin = time.time()
        if job.mode == "simulate":
            probs = simulate_ideal(job.circuit)
            meta = {"mode": "simulate"}
            spectra = None
        elif job.mode == "emulate":
            probs, meta, spectra = _run_emulated(job.circuit, profile, job.noise)
        else:
            raise ValueError(f"unknown mode {job.mode!r}")
        reduced = marginalize(probs, job.circuit.measure)
        meta["wall_seconds"] = round(time.time() - t_begin, 3)
        job.result = {
            "probabilities": [float(v) for v in reduced],
            "labels": basis_labels(job.circuit.measure),
            "full_probabilities": [float(v) for v in probs],
            "metadata": meta,
        }
        job.spectra = spectra
        job.status = "done"
    except Exception as exc:
        job.status = "failed"
        job.error = f"{type(exc).__name__}: {exc}"
    job.finished_at = datetime.now(timezone.utc).isoformat()
    return job


def prepare_initial_state(profile: SystemProfile, noise: NoiseConfig):
    """PPS preparation as a job would run it: the GRAPE permutation pulse
    when the library carries one, the exact matrix otherwise."""
    library = profile.library
    pps_conf = profile.resolved_pps_config()
    permute_wf = None
    if library is not None and not library.is_ideal and library.has("PERMUTE"):
        permute_wf = library.waveform("PERMUTE")
        pps_conf = PpsConfig(pps_conf.cycles, pps_conf.delay_s,
                             use_ideal_permutation=False)
    return prepare_pps(profile.spec, pps_conf, noise,
                       permutation_waveform=permute_wf), pps_conf


def play_schedule(rho, schedule, profile: SystemProfile, noise: NoiseConfig,
                  t_start: float = 0.0):
    """Pulse-level execution of a compiled schedule on a state.

    Ideal-library entries (no waveform) apply their exact unitary with the
    frame offset folded in, taking zero time."""
    import scipy.linalg

    from .compiler import JZ_TOTAL
    from .spincore import DensityMatrix

    spec = profile.spec
    library = profile.require_library()
    h0 = build_drift_hamiltonian(spec)
    t_cursor = t_start
    for action in schedule.actions:
        if isinstance(action, PulsePlay):
            if library.entries[action.key].waveform is None:
                u = library.unitary(action.key)
                if action.phase_offset != 0.0:
                    rot = scipy.linalg.expm(-1j * action.phase_offset * JZ_TOTAL)
                    u = rot @ u @ rot.conj().T
                rho = DensityMatrix(u @ rho.matrix @ u.conj().T,
                                    validate=False).renormalized()
                continue
            wf = library.waveform(action.key).with_phase_offset(action.phase_offset)
            wf = quantize(wf)
            rho = evolve(rho, wf, h0, noise, spec, t_start=t_cursor)
            t_cursor += wf.total_duration
        elif isinstance(action, Delay):
            rho = free_evolution(rho, action.duration_s, spec, noise, t_start=t_cursor)
            t_cursor += action.duration_s
    return rho, t_cursor


def _run_emulated(circuit: Circuit, profile: SystemProfile, noise: NoiseConfig):
    spec = profile.spec
    library = profile.require_library()

    report, pps_conf = prepare_initial_state(profile, noise)
    schedule = compile_circuit(circuit, library, FrameState.zero())
    rho, _ = play_schedule(report.state, schedule, profile, noise,
                           t_start=pps_conf.cycles * pps_conf.delay_s)
    fidelities = {a.key: library.fidelity(a.key)
                  for a in schedule.actions if isinstance(a, PulsePlay)}

    record = measure_diagonal(rho, spec, noise, schedule.final_frame,
                              eta_scale=report.eta, detail=True)
    meta = {
        "mode": "emulate",
        "pps": {"eta": report.eta, "uniformity": report.uniformity,
                "cycles": report.cycles, "delay_s": report.delay_s},
        "schedule_duration_s": schedule.total_duration,
        "pulse_fidelities": fidelities,
    }
    spectra = [
        {"qubit": q + 1,
         "frequencies_hz": [float(f) for f in sp.frequencies_hz],
         "real": [float(v) for v in sp.amplitudes.real],
         "imag": [float(v) for v in sp.amplitudes.imag]}
        for q, sp in enumerate(record.spectra)
    ]
    return record.probabilities, meta, spectra


class JobStore:
    """Append-only JSON-lines persistence (one file per day) plus an
    in-memory index; reads are lock-free snapshots, appends serialized."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._index: dict[str, dict] = {}
        self._load()

    def _load(self):
        for path in sorted(self.data_dir.glob("jobs-*.jsonl")):
            with path.open() as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        record = json.loads(line)
                        self._index[record["id"]] = record

    def _day_file(self) -> Path:
        day = datetime.now(timezone.utc).strftime("%Y%m%d")
        return self.data_dir / f"jobs-{day}.jsonl"

    def append(self, job: Job):
        record = job.to_dict()
        with self._lock:
            with self._day_file().open("a") as fh:
                fh.write(json.dumps(record) + "\n")
            self._index[job.id] = record

    def get(self, job_id: str) -> dict | None:
        return self._index.get(job_id)

    def list_ids(self) -> list[dict]:
        rows = sorted(self._index.values(), key=lambda r: r["created_at"])
        return [{"id": r["id"], "status": r["status"], "mode": r["mode"],
                 "created_at": r["created_at"]} for r in rows]

    def save_spectra(self, job_id: str, spectra: list):
        path = self.data_dir / f"spectra-{job_id}.json"
        with self._lock:
            path.write_text(json.dumps(spectra))

    def get_spectra(self, job_id: str) -> list | None:
        path = self.data_dir / f"spectra-{job_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text())
