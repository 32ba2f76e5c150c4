"""RF control and state evolution.

Waveforms are piecewise-constant (duration, amplitude, phase) segments played
on the single shared RF channel, so the control term drives all three spins
identically. Amplitudes and phases quantize onto the hardware grid of
full_scale/65536 and 2*pi/65536. Evolution is exact per segment
(eigendecomposition of the 8x8 generator); the relaxation channel combines
per-spin flips, pairwise double-quantum cross-relaxation, and pure dephasing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.linalg

from .spincore import (
    DensityMatrix,
    IDENTITY_8,
    IZ,
    MoleculeSpec,
    SX,
    SY,
    build_drift_hamiltonian,
)

#: Default full-scale Rabi amplitude, Hz. A 10 us square pulse at full scale
#: is a global 90-degree rotation (Omega * t = 1/4).
FULL_SCALE_HZ = 25_000.0

#: Amplitude and phase quantization depth of the waveform generator.
QUANT_LEVELS = 65536

TWO_PI = 2.0 * np.pi

# Shared-channel control operators: sum_k sigma_{x,y}^k / 2.
_SX_HALF = 0.5 * (SX[0] + SX[1] + SX[2])
_SY_HALF = 0.5 * (SY[0] + SY[1] + SY[2])
_IZ_TOTAL = IZ[0] + IZ[1] + IZ[2]

# Coherence order of each density-matrix element: sum over qubits of
# bit(row) - bit(col); a uniform carrier shift advances element phases in
# proportion.
_COHERENCE_ORDERS = sum(
    np.subtract.outer(bits, bits)
    for bits in (np.array([(i >> shift) & 1 for i in range(8)], dtype=float)
                 for shift in (2, 1, 0)))


@dataclass(frozen=True)
class PulseSegment:
    duration_s: float
    amplitude_hz: float
    phase_rad: float

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("segment duration must be positive")
        if self.amplitude_hz < 0:
            raise ValueError("segment amplitude must be non-negative")
        object.__setattr__(self, "phase_rad", float(self.phase_rad) % TWO_PI)


@dataclass(frozen=True)
class Waveform:
    segments: tuple[PulseSegment, ...]
    quantized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_duration(self) -> float:
        return sum(s.duration_s for s in self.segments)

    def with_phase_offset(self, offset: float) -> "Waveform":
        """Shift every segment phase; rotates the pulse's equatorial axes."""
        if offset % TWO_PI == 0.0:
            return self
        segs = tuple(replace(s, phase_rad=(s.phase_rad + offset) % TWO_PI)
                     for s in self.segments)
        return Waveform(segs, quantized=False)

    def to_json(self) -> str:
        return json.dumps({
            "quantized": self.quantized,
            "segments": [
                {"duration_s": s.duration_s,
                 "amplitude_hz": s.amplitude_hz,
                 "phase_rad": s.phase_rad}
                for s in self.segments
            ],
        })

    @classmethod
    def from_json(cls, text: str) -> "Waveform":
        d = json.loads(text)
        segs = tuple(PulseSegment(s["duration_s"], s["amplitude_hz"], s["phase_rad"])
                     for s in d["segments"])
        return cls(segs, quantized=bool(d.get("quantized", False)))

    @classmethod
    def from_file(cls, path: str | Path) -> "Waveform":
        return cls.from_json(Path(path).read_text())

    @classmethod
    def square(cls, duration_s: float, amplitude_hz: float, phase_rad: float = 0.0) -> "Waveform":
        return cls((PulseSegment(duration_s, amplitude_hz, phase_rad),))


@dataclass(frozen=True)
class NoiseConfig:
    """Environment knobs for the emulated instrument.

    drift_hz_per_s models an unlocked static field as a deterministic linear
    carrier ramp added to all three chemical shifts; the field lock is
    drift = 0. polarization sets the thermal deviation scale that relaxation
    pulls the populations toward. cross_relaxation is the Solomon ratio
    sigma/rho of pairwise double-quantum flips to auto-relaxation (0 = pure
    independent-spin damping, 0.5 = extreme-narrowing dipolar limit); the
    basis-permutation state preparation relies on the transient
    cross-relaxation overshoot, exactly as on the bench.
    """

    relaxation_enabled: bool = True
    drift_hz_per_s: float = 0.0
    relax_during_pulses: bool = False
    polarization: float = 1e-5
    cross_relaxation: float = 0.4

    def __post_init__(self):
        if self.drift_hz_per_s < 0:
            raise ValueError("drift rate must be non-negative")
        # ratio 0.5 would leave only pair flips, which conserve parity and
        # freeze one sector; keep a single-quantum pathway open
        if not 0.0 <= self.cross_relaxation < 0.5:
            raise ValueError("cross-relaxation ratio must lie in [0, 0.5)")

    @classmethod
    def ideal(cls) -> "NoiseConfig":
        return cls(relaxation_enabled=False)


def quantize(waveform: Waveform, full_scale: float = FULL_SCALE_HZ) -> Waveform:
    """Round amplitudes to the nearest multiple of full_scale/65536 and phases
    to the nearest multiple of 2*pi/65536 (wrapping 2*pi to 0)."""
    amp_step = full_scale / QUANT_LEVELS
    phase_step = TWO_PI / QUANT_LEVELS
    segs = []
    for s in waveform.segments:
        if s.amplitude_hz < 0:
            raise ValueError("negative amplitude")
        if s.amplitude_hz > full_scale * (1 + 1e-12):
            raise ValueError(f"amplitude {s.amplitude_hz} exceeds full scale {full_scale}")
        amp = round(s.amplitude_hz / amp_step) * amp_step
        phase = (round(s.phase_rad / phase_step) % QUANT_LEVELS) * phase_step
        segs.append(PulseSegment(s.duration_s, amp, phase))
    return Waveform(tuple(segs), quantized=True)


def control_hamiltonian(segment: PulseSegment) -> np.ndarray:
    """Shared-channel drive generator, rad/s:
    Hc = 2*pi*Omega * sum_k (cos(phi) sx_k/2 + sin(phi) sy_k/2)."""
    omega = segment.amplitude_hz
    phi = segment.phase_rad
    return TWO_PI * omega * (np.cos(phi) * _SX_HALF + np.sin(phi) * _SY_HALF)


def segment_generators(waveform: Waveform, h0: np.ndarray) -> np.ndarray:
    """Stacked (n_seg, 8, 8) Hermitian generators H0 + Hc per segment."""
    n = len(waveform.segments)
    amps = np.array([s.amplitude_hz for s in waveform.segments])
    phis = np.array([s.phase_rad for s in waveform.segments])
    gens = np.broadcast_to(h0.astype(complex), (n, 8, 8)).copy()
    gens += TWO_PI * (amps * np.cos(phis))[:, None, None] * _SX_HALF
    gens += TWO_PI * (amps * np.sin(phis))[:, None, None] * _SY_HALF
    return gens


def segment_propagators(waveform: Waveform, h0: np.ndarray) -> np.ndarray:
    """Stacked per-segment unitaries exp(-i (H0+Hc) t), exact via eigh."""
    if not waveform.segments:
        return np.zeros((0, 8, 8), dtype=complex)
    gens = segment_generators(waveform, h0)
    durs = np.array([s.duration_s for s in waveform.segments])
    w, v = np.linalg.eigh(gens)
    phases = np.exp(-1j * w * durs[:, None])
    return np.einsum("nab,nb,ncb->nac", v, phases, v.conj())


def propagator(waveform: Waveform, h0: np.ndarray) -> np.ndarray:
    """Total time-ordered propagator of the waveform under drift h0."""
    us = segment_propagators(waveform, h0)
    total = IDENTITY_8.copy()
    for u in us:
        total = u @ total
    return total


def _lindblad_term(rate: float, l_op: np.ndarray) -> np.ndarray:
    eye = IDENTITY_8
    ldl = l_op.conj().T @ l_op
    return rate * (np.kron(l_op, l_op.conj())
                   - 0.5 * np.kron(ldl, eye)
                   - 0.5 * np.kron(eye, ldl.T))


def _pair_flip_op(i: int, j: int) -> np.ndarray:
    """|0_i 0_j><1_i 1_j|, identity on the spectator (local pair jump)."""
    op = np.zeros((8, 8), dtype=complex)
    for b in range(8):
        if ((b >> (3 - i)) & 1) and ((b >> (3 - j)) & 1):
            a = b & ~(1 << (3 - i)) & ~(1 << (3 - j))
            op[a, b] = 1.0
    return op


def relaxation_liouvillian(spec: MoleculeSpec, noise: NoiseConfig) -> np.ndarray:
    """64x64 generator of the longitudinal/transverse channel.

    Longitudinal relaxation mixes per-spin flips (rate W1) with pairwise
    double-quantum flips (rate W2, the Solomon cross-relaxation pathway that
    dominates for like spins relaxing through their mutual dipolar coupling).
    Rates are calibrated so that (a) the fixed point is the product thermal
    state, (b) an inversion-recovery experiment on all three spins decays at
    exactly 1/T1 (the symmetric Solomon mode, which is what the instrument
    measures on same-species spins), and (c) with the pure-dephasing top-up
    the observable transverse magnetization decays at exactly 1/T2.
    """
    z_eq = noise.polarization / 2.0  # <sigma_z> of the thermal state per spin
    x = noise.cross_relaxation
    # Solomon rates: auto rho = 2*W1 + 2*W2, cross sigma = W2 per pair,
    # sigma = x * rho; symmetric-mode calibration rho + 2*sigma = 1/T1.
    rho_auto = 1.0 / ((1.0 + 2.0 * x) * spec.t1_s)
    w2 = x * rho_auto
    w1 = (1.0 - 2.0 * x) * rho_auto / 2.0
    # T1-family contribution to the observable transverse decay is W1 + W2;
    # pure dephasing supplies the rest of 1/T2 (D[sqrt(c) sz] decays at 2c).
    gamma_phi = 0.5 * (1.0 / spec.t2_s - (w1 + w2))
    if gamma_phi < -1e-15:
        raise ValueError("T2 too long for this relaxation channel")

    lv = np.zeros((64, 64), dtype=complex)
    from .spincore import SZ, embed
    down2 = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
    for k in (1, 2, 3):
        # detailed balance p0/p1 = (1+z)/(1-z)
        lv += _lindblad_term(w1 * (1.0 + z_eq), embed(down2, k))
        lv += _lindblad_term(w1 * (1.0 - z_eq), embed(down2.conj().T, k))
        lv += _lindblad_term(max(gamma_phi, 0.0), SZ[k - 1])
    for i, j in ((1, 2), (1, 3), (2, 3)):
        # detailed balance p00/p11 = ((1+z)/(1-z))^2
        flip = _pair_flip_op(i, j)
        lv += _lindblad_term(w2 * (1.0 + z_eq) ** 2, flip)
        lv += _lindblad_term(w2 * (1.0 - z_eq) ** 2, flip.conj().T)
    return lv


def hamiltonian_liouvillian(h: np.ndarray) -> np.ndarray:
    """-i [H, .] as a 64x64 superoperator on row-major-vectorized states."""
    eye = IDENTITY_8
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def _apply_superop_exp(lv: np.ndarray, t: float, rho: np.ndarray) -> np.ndarray:
    prop = scipy.linalg.expm(lv * t)
    return (prop @ rho.reshape(64)).reshape(8, 8)


_PROPAGATOR_CACHE: dict = {}


def _cached_free_propagator(spec: MoleculeSpec, noise: NoiseConfig, t: float) -> np.ndarray:
    """Memoized exp((Lh + Lrelax) t); parameter sweeps and repeated cycles
    reuse the same delay propagator."""
    key = (spec.chemical_shifts_hz, spec.j_couplings_hz, spec.t1_s, spec.t2_s,
           noise.polarization, noise.cross_relaxation, round(t, 12))
    prop = _PROPAGATOR_CACHE.get(key)
    if prop is None:
        lv = (hamiltonian_liouvillian(build_drift_hamiltonian(spec))
              + relaxation_liouvillian(spec, noise))
        prop = scipy.linalg.expm(lv * t)
        if len(_PROPAGATOR_CACHE) > 256:
            _PROPAGATOR_CACHE.clear()
        _PROPAGATOR_CACHE[key] = prop
    return prop


def free_evolution(rho: DensityMatrix, t: float, spec: MoleculeSpec,
                   noise: NoiseConfig, t_start: float = 0.0) -> DensityMatrix:
    """Evolve under the drift Hamiltonian with T1/T2 relaxation for time t.

    With drift enabled the carrier offset ramps linearly from t_start, which
    adds a deterministic quadratic phase to coherences.
    """
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    if t == 0:
        return rho
    h0 = build_drift_hamiltonian(spec)
    m = rho.matrix

    def ramp_phase(duration: float, start: float) -> np.ndarray:
        """Elementwise coherence phases of the linear carrier ramp over
        [start, start+duration]: each element picks up its coherence order
        times the integrated offset (exact for a linear ramp)."""
        accrued = noise.drift_hz_per_s * ((start + duration) ** 2 - start ** 2) / 2.0
        return np.exp(1j * TWO_PI * accrued * _COHERENCE_ORDERS)

    if not noise.relaxation_enabled:
        w = np.real(np.diag(h0))
        phase = np.exp(-1j * np.subtract.outer(w, w) * t)
        out = m * phase
        if noise.drift_hz_per_s > 0.0:
            out = out * ramp_phase(t, t_start)
        return DensityMatrix(out, validate=False).renormalized()

    if noise.drift_hz_per_s == 0.0:
        out = (_cached_free_propagator(spec, noise, t) @ m.reshape(64)).reshape(8, 8)
    else:
        # Midpoint frequency is exact for a linear ramp; the sub-step only
        # Trotterizes against the slow (seconds-scale) relaxation.
        relax = relaxation_liouvillian(spec, noise)
        n_steps = max(1, int(np.ceil(t / 0.05)))
        dt = t / n_steps
        out = m
        for i in range(n_steps):
            t_mid = t_start + (i + 0.5) * dt
            h = h0 + TWO_PI * noise.drift_hz_per_s * t_mid * _IZ_TOTAL
            lv = hamiltonian_liouvillian(h) + relax
            out = _apply_superop_exp(lv, dt, out)
    return DensityMatrix(out, validate=False).renormalized()


def evolve(rho: DensityMatrix, waveform: Waveform, h0: np.ndarray,
           noise: NoiseConfig, spec: MoleculeSpec | None = None,
           t_start: float = 0.0) -> DensityMatrix:
    """Play a waveform on a state: per-segment unitary conjugation, with the
    relaxation channel folded in exactly (combined Liouvillian) when enabled.

    Relaxation during pulses is off by default -- pulses are short against
    T2 -- and zero-amplitude segments always count as delays. A molecule spec
    is required whenever relaxation applies.
    """
    m = rho.matrix
    if noise.relaxation_enabled and spec is None:
        raise ValueError("relaxation requires a MoleculeSpec")
    relax = (relaxation_liouvillian(spec, noise)
             if noise.relaxation_enabled else None)
    t_elapsed = t_start
    for seg in waveform.segments:
        is_delay = seg.amplitude_hz == 0.0
        h = h0
        if noise.drift_hz_per_s > 0.0:
            t_mid = t_elapsed + 0.5 * seg.duration_s
            h = h0 + TWO_PI * noise.drift_hz_per_s * t_mid * _IZ_TOTAL
        if relax is not None and (is_delay or noise.relax_during_pulses):
            lv = hamiltonian_liouvillian(h + control_hamiltonian(seg)) + relax
            m = _apply_superop_exp(lv, seg.duration_s, m)
        else:
            w, v = np.linalg.eigh(h + control_hamiltonian(seg))
            u = (v * np.exp(-1j * w * seg.duration_s)) @ v.conj().T
            m = u @ m @ u.conj().T
        t_elapsed += seg.duration_s
    return DensityMatrix(m, validate=False).renormalized()
