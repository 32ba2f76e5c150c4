"""Synthesized-pulse library: one GRAPE waveform per native gate, cached.

Only one pulse per equatorial-axis family is synthesized; the compiler turns
an x-axis pulse into y or negative-axis variants by offsetting segment
phases, which conjugates the propagator by a global z-rotation and leaves
the fidelity unchanged. Diagonal gates (CZ, CCZ) and the basis permutation
are synthesized directly.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gates
from .grape import GrapeConfig, SynthesisResult, gate_fidelity, synthesize
from .pulses import FULL_SCALE_HZ, Waveform, propagator
from .spincore import MoleculeSpec, build_drift_hamiltonian


def synthesis_targets(spec: MoleculeSpec) -> dict[str, np.ndarray]:
    """Unitaries the library synthesizes, keyed by library entry name."""
    from .pps import permutation_unitary

    targets: dict[str, np.ndarray] = {}
    for q in (1, 2, 3):
        targets[f"X{q}"] = gates.gate_unitary(gates.Gate("X", (q,)))
        targets[f"H{q}"] = gates.gate_unitary(gates.Gate("H", (q,)))
        targets[f"R90x{q}"] = gates.gate_unitary(gates.Gate("R90x", (q,)))
    for c, t in ((1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)):
        targets[f"CNOT{c}{t}"] = gates.gate_unitary(gates.Gate("CNOT", (c, t)))
    for a, b in ((1, 2), (1, 3), (2, 3)):
        targets[f"CZ{a}{b}"] = gates.gate_unitary(gates.Gate("CZ", (a, b)))
    for t in (1, 2, 3):
        c1, c2 = [q for q in (1, 2, 3) if q != t]
        targets[f"TOFFOLI{c1}{c2}{t}"] = gates.gate_unitary(gates.Gate("Toffoli", (c1, c2, t)))
    targets["CCZ"] = gates.gate_unitary(gates.Gate("CCZ", (1, 2, 3)))
    targets["PERMUTE"] = permutation_unitary()
    return targets


def _gate_qubits(key: str) -> tuple[int, ...]:
    if key in ("CCZ", "PERMUTE"):
        return (1, 2, 3)
    for prefix in ("R90x", "CNOT", "CZ", "TOFFOLI", "X", "H"):
        if key.startswith(prefix):
            return tuple(int(ch) for ch in key[len(prefix):])
    raise KeyError(f"unknown library key {key!r}")


def synthesis_config(spec: MoleculeSpec, key: str) -> GrapeConfig:
    """Default pulse shape per gate class: 5 ms / 125 segments for selective
    single-qubit gates (shorter windows hit the time-bandwidth limit of the
    sub-kHz shift differences), 3/|J_min| over the gate's qubits with 500
    segments for entangling gates."""
    qubits = _gate_qubits(key)
    if len(qubits) == 1:
        return GrapeConfig(segment_count=125, segment_duration=4e-5,
                           max_iterations=1500, target_fidelity=0.9992,
                           step_size=0.5, amplitude_bound=FULL_SCALE_HZ)
    js = [abs(spec.j_coupling(a, b))
          for i, a in enumerate(qubits) for b in qubits[i + 1:]]
    duration = 3.0 / min(js)
    n_seg = 500
    return GrapeConfig(segment_count=n_seg, segment_duration=duration / n_seg,
                       max_iterations=1200, target_fidelity=0.999,
                       step_size=0.5, amplitude_bound=FULL_SCALE_HZ)


def _initial_waveform(spec: MoleculeSpec, key: str, config: GrapeConfig):
    """Selective one-qubit gates start from a frequency-shifted soft pulse;
    entangling gates start random (their landscape is benign)."""
    from .grape import soft_pulse

    qubits = _gate_qubits(key)
    if len(qubits) != 1:
        return None
    q = qubits[0]
    if key.startswith("X"):
        rotations = [(np.pi, 0.0)]
    elif key.startswith("R90x"):
        rotations = [(np.pi / 2, 0.0)]
    elif key.startswith("H"):
        # H = X . Ry(pi/2) exactly, so seed with that composite.
        rotations = [(np.pi / 2, np.pi / 2), (np.pi, 0.0)]
    else:
        return None
    return soft_pulse(spec, q, rotations, config.segment_count,
                      config.segment_duration)


@dataclass
class LibraryEntry:
    key: str
    waveform: Waveform | None
    unitary: np.ndarray
    fidelity: float
    iterations: int = 0
    seed: int = 0


class PulseLibrary:
    """Gate-name -> pulse mapping used by the compiler and the job engine."""

    def __init__(self, spec: MoleculeSpec, entries: dict[str, LibraryEntry]):
        self.spec = spec
        self.entries = entries

    def has(self, key: str) -> bool:
        return key in self.entries

    def unitary(self, key: str) -> np.ndarray:
        return self.entries[key].unitary

    def waveform(self, key: str) -> Waveform:
        wf = self.entries[key].waveform
        if wf is None:
            raise KeyError(f"library entry {key} has no waveform (ideal library?)")
        return wf

    def duration(self, key: str) -> float:
        wf = self.entries[key].waveform
        return wf.total_duration if wf is not None else 0.0

    def fidelity(self, key: str) -> float:
        return self.entries[key].fidelity

    @property
    def is_ideal(self) -> bool:
        return all(e.waveform is None for e in self.entries.values())

    def manifest(self) -> list[dict]:
        """User-facing gate list with fidelities; phase-derived variants share
        the base pulse's fidelity, virtual z-gates are exact and free."""
        rows = []
        for key, e in sorted(self.entries.items()):
            rows.append({"gate": key, "fidelity": round(e.fidelity, 6),
                         "duration_s": self.duration(key), "kind": "pulse"})
        for q in (1, 2, 3):
            if self.has(f"X{q}"):
                rows.append({"gate": f"Y{q}", "fidelity": round(self.fidelity(f"X{q}"), 6),
                             "duration_s": self.duration(f"X{q}"),
                             "kind": "derived", "base": f"X{q}"})
            if self.has(f"R90x{q}"):
                rows.append({"gate": f"R90y{q}", "fidelity": round(self.fidelity(f"R90x{q}"), 6),
                             "duration_s": self.duration(f"R90x{q}"),
                             "kind": "derived", "base": f"R90x{q}"})
            for name in (f"Z{q}", f"Rz{q}", f"R90z{q}", f"T{q}", f"Tdag{q}"):
                rows.append({"gate": name, "fidelity": 1.0, "duration_s": 0.0,
                             "kind": "virtual"})
        return rows

    @classmethod
    def ideal(cls, spec: MoleculeSpec) -> "PulseLibrary":
        """Infinite-fidelity library: exact unitaries, no waveforms."""
        entries = {key: LibraryEntry(key, None, u, 1.0)
                   for key, u in synthesis_targets(spec).items()}
        return cls(spec, entries)


def _cache_tag(spec: MoleculeSpec, key: str, config: GrapeConfig, seed: int) -> str:
    blob = json.dumps([spec.chemical_shifts_hz, spec.j_couplings_hz, key,
                       config.segment_count, config.segment_duration,
                       config.target_fidelity, config.amplitude_bound, seed])
    import hashlib
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


def synthesize_gate(spec: MoleculeSpec, key: str, seed: int = 0,
                    config: GrapeConfig | None = None,
                    min_fidelity: float | None = None, retries: int = 2) -> SynthesisResult:
    """Synthesize one library gate, retrying with fresh seeds if the first
    attempt stalls below min_fidelity; the best attempt wins."""
    config = config or synthesis_config(spec, key)
    if min_fidelity is None:
        min_fidelity = 0.999 if len(_gate_qubits(key)) == 1 else 0.99
    target = synthesis_targets(spec)[key]
    init = _initial_waveform(spec, key, config)
    best = synthesize(target, spec, config, seed=seed, initial_waveform=init)
    attempt = 0
    while best.fidelity < min_fidelity and attempt < retries:
        attempt += 1
        result = synthesize(target, spec, config, seed=seed + 1000 * attempt,
                            initial_waveform=init)
        if result.fidelity > best.fidelity:
            best = result
    return best


def _synthesize_for_pool(spec_json: str, key: str, seed: int):
    """Worker entry point: synthesize one gate, return it serialized."""
    spec = MoleculeSpec.from_json(spec_json)
    t0 = time.time()
    result = synthesize_gate(spec, key, seed=seed)
    return (key, result.waveform.to_json(), result.fidelity,
            result.iterations, result.seed, round(time.time() - t0, 2))


def build_library(spec: MoleculeSpec, cache_dir: str | Path | None = None,
                  seed: int = 0, keys: list[str] | None = None,
                  progress=None, workers: int | None = None) -> PulseLibrary:
    """Build (or load from cache) the full synthesized-pulse library.

    Syntheses are independent per gate and run on a small process pool;
    results are deterministic per (gate, seed) regardless of scheduling.
    A build manifest in the cache directory records the wall time."""
    import os

    h0 = build_drift_hamiltonian(spec)
    targets = synthesis_targets(spec)
    keys = keys or list(targets)
    cache = Path(cache_dir) if cache_dir else None
    if cache:
        cache.mkdir(parents=True, exist_ok=True)
    entries: dict[str, LibraryEntry] = {}

    def cache_paths(key):
        if not cache:
            return None, None
        tag = _cache_tag(spec, key, synthesis_config(spec, key), seed)
        return cache / f"{key}.{tag}.json", cache / f"{key}.{tag}.meta.json"

    to_build = []
    for key in keys:
        wf_path, meta_path = cache_paths(key)
        if wf_path and wf_path.exists() and meta_path.exists():
            waveform = Waveform.from_file(wf_path)
            meta = json.loads(meta_path.read_text())
            unitary = propagator(waveform, h0)
            entries[key] = LibraryEntry(key, waveform, unitary,
                                        gate_fidelity(targets[key], unitary),
                                        meta.get("iterations", 0),
                                        meta.get("seed", seed))
            if progress:
                progress(key, entries[key].fidelity, True)
        else:
            to_build.append(key)

    if to_build:
        t_build = time.time()
        workers = workers or min(4, os.cpu_count() or 1)
        results = []
        if workers > 1 and len(to_build) > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_synthesize_for_pool, spec.to_json(), key, seed)
                           for key in to_build]
                results = [f.result() for f in futures]
        else:
            results = [_synthesize_for_pool(spec.to_json(), key, seed)
                       for key in to_build]
        for key, wf_json, fidelity, iterations, used_seed, wall in results:
            waveform = Waveform.from_json(wf_json)
            unitary = propagator(waveform, h0)
            entries[key] = LibraryEntry(key, waveform, unitary, fidelity,
                                        iterations, used_seed)
            wf_path, meta_path = cache_paths(key)
            if wf_path:
                wf_path.write_text(wf_json)
                meta_path.write_text(json.dumps({
                    "gate": key, "fidelity": fidelity, "iterations": iterations,
                    "seed": used_seed, "wall_seconds": wall,
                }))
            if progress:
                progress(key, fidelity, False)
        if cache:
            (cache / "build_manifest.json").write_text(json.dumps({
                "wall_seconds": round(time.time() - t_build, 2),
                "workers": workers,
                "gates_synthesized": len(to_build),
            }))
    return PulseLibrary(spec, entries)
