"""Ensemble measurement emulation: readout pulses, FID acquisition, spectra,
peak amplitudes, and reconstruction of the eight diagonal elements.

Measuring qubit k: a 90-degree y pulse (frame-adjusted) turns population
differences of qubit k into transverse coherence; the shared channel then
detects sum_k <sigma_x^k + i sigma_y^k> while the state precesses under the
drift Hamiltonian with transverse decay. Each qubit shows four absorptive
lines at nu_q +/- J_qa/2 +/- J_qb/2, labeled by the partner-spin states, and
their real amplitudes are +/-1 combinations of the seven sigma-z product
expectations. Three such experiments overdetermine the seven expectations;
a least-squares solve and the standard sign equations give rho_11..rho_88.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .compiler import FrameState
from .gates import rotation
from .pulses import NoiseConfig
from .spincore import (
    DensityMatrix,
    MoleculeSpec,
    build_drift_hamiltonian,
    embed,
    transition_frequencies,
)

DEFAULT_DURATION_S = 1.0
DEFAULT_DWELL_S = 5e-4

#: Partner qubits per measured qubit, ascending; peak labels iterate the
#: partners' spin states as (up,up), (up,down), (down,up), (down,down).
PARTNERS = {1: (2, 3), 2: (1, 3), 3: (1, 2)}
PEAK_SIGNS = [(+1, +1), (+1, -1), (-1, +1), (-1, -1)]


class ReadoutError(Exception):
    pass


@dataclass
class Fid:
    """Complex free-induction-decay record."""

    samples: np.ndarray
    dwell_s: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1 or len(self.samples) < 1024:
            raise ValueError("FID needs at least 1024 samples")

    @property
    def duration_s(self) -> float:
        return len(self.samples) * self.dwell_s

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dwell_s


@dataclass
class Spectrum:
    frequencies_hz: np.ndarray
    amplitudes: np.ndarray
    native_resolution_hz: float
    dwell_s: float
    source_samples: np.ndarray | None = None

    def real_at(self, freq_hz: float) -> float:
        """Real part of the spectrum at an exact frequency.

        When the source record is attached the value is the exact
        single-frequency transform (no grid interpolation error); otherwise
        a local quadratic through the three nearest grid points is used.
        """
        if self.source_samples is not None:
            n = len(self.source_samples)
            t = np.arange(n) * self.dwell_s
            val = np.sum(self.source_samples * np.exp(-2j * np.pi * freq_hz * t)) / n
            return float(val.real)
        idx = int(np.argmin(np.abs(self.frequencies_hz - freq_hz)))
        idx = min(max(idx, 1), len(self.frequencies_hz) - 2)
        x = self.frequencies_hz[idx - 1:idx + 2]
        y = np.real(self.amplitudes[idx - 1:idx + 2])
        coeffs = np.polyfit(x - x[1], y, 2)
        return float(np.polyval(coeffs, freq_hz - x[1]))

    def to_csv(self) -> str:
        lines = ["frequency_hz,real,imag"]
        for f, a in zip(self.frequencies_hz, self.amplitudes):
            lines.append(f"{f:.6f},{a.real:.9e},{a.imag:.9e}")
        return "\n".join(lines) + "\n"


def acquire_fid(rho: DensityMatrix, spec: MoleculeSpec, noise: NoiseConfig,
                duration_s: float = DEFAULT_DURATION_S,
                dwell_s: float = DEFAULT_DWELL_S,
                detection_phase: float = 0.0) -> Fid:
    """Detect sum_k <sigma_x^k + i sigma_y^k> while the state precesses.

    Only single-quantum elements radiate; each evolves at its transition
    frequency with transverse decay 1/T2 (when relaxation is enabled) and,
    with field drift, the deterministic quadratic phase of a linear carrier
    ramp. Populations are frozen during acquisition.
    """
    n = int(round(duration_s / dwell_s))
    if noise.relaxation_enabled and duration_s < 5.0 * spec.t2_s:
        raise ValueError("acquisition window must cover at least 5*T2")
    t = np.arange(n) * dwell_s
    energies = np.real(np.diag(build_drift_hamiltonian(spec)))
    m = rho.matrix
    rate = 1.0 / spec.t2_s if noise.relaxation_enabled else 0.0

    signal = np.zeros(n, dtype=complex)
    for k, stride in ((1, 4), (2, 2), (3, 1)):
        for b in range(8):
            if (b >> (3 - k)) & 1:
                continue  # need bit_k = 0 in the bra index
            a = b + stride
            w = 2.0 * m[a, b] * np.exp(-1j * detection_phase)
            if w == 0:
                continue
            freq = (energies[b] - energies[a]) / (2.0 * np.pi)
            signal += w * np.exp((2j * np.pi * freq - rate) * t)
    if noise.drift_hz_per_s > 0.0:
        signal *= np.exp(1j * np.pi * noise.drift_hz_per_s * t**2)
    return Fid(signal, dwell_s)


def spectrum(fid: Fid, pad: int = 1) -> Spectrum:
    """Discrete Fourier transform with 1/count normalization, fftshifted so
    the grid spans +/- 1/(2*dwell). Zero-padding refines the display grid
    without changing amplitudes."""
    n = len(fid.samples)
    nfft = n * pad
    amps = np.fft.fftshift(np.fft.fft(fid.samples, nfft)) / n
    freqs = np.fft.fftshift(np.fft.fftfreq(nfft, fid.dwell_s))
    return Spectrum(freqs, amps, native_resolution_hz=1.0 / fid.duration_s,
                    dwell_s=fid.dwell_s, source_samples=fid.samples)


def fit_peaks(spec_data: Spectrum, qubit: int, spec: MoleculeSpec) -> np.ndarray:
    """Real-part amplitudes of the qubit's four lines, ordered by partner
    states (up,up), (up,down), (down,up), (down,down)."""
    positions = transition_frequencies(spec, qubit)
    nyquist = 0.5 / spec_data.dwell_s
    if np.max(np.abs(positions)) >= nyquist:
        raise ReadoutError(
            f"qubit {qubit} lines fall outside the +/-{nyquist:.0f} Hz "
            f"acquisition window; shorten the dwell time")
    gaps = [abs(a - b) for i, a in enumerate(positions) for b in positions[i + 1:]]
    linewidth = 1.0 / (np.pi * spec.t2_s)
    if min(gaps) < 2.0 * linewidth:
        raise ReadoutError(
            f"qubit {qubit} lines are unresolved: spacing {min(gaps):.3g} Hz "
            f"< 2 linewidths ({2 * linewidth:.3g} Hz)")
    if min(gaps) < spec_data.native_resolution_hz:
        raise ReadoutError(
            f"qubit {qubit} lines are closer than the spectral resolution "
            f"{spec_data.native_resolution_hz:.3g} Hz")
    return np.array([spec_data.real_at(f) for f in positions])


def peak_design_matrix() -> np.ndarray:
    """(12, 7) map from the seven expectations [z1,z2,z3,z12,z13,z23,z123]
    to the twelve peak combination values (four per measured qubit)."""
    rows = []
    for q in (1, 2, 3):
        for sa, sb in PEAK_SIGNS:
            row = np.zeros(7)
            row[q - 1] = 1.0
            a, b = PARTNERS[q]
            pair_col = {(1, 2): 3, (1, 3): 4, (2, 3): 5}
            row[pair_col[tuple(sorted((q, a)))]] = sa
            row[pair_col[tuple(sorted((q, b)))]] = sb
            row[6] = sa * sb
            rows.append(row)
    return np.array(rows)


@dataclass(frozen=True)
class ExpectationSet:
    """<z1>, <z2>, <z3>, <z1z2>, <z1z3>, <z2z3>, <z1z2z3>."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != 7:
            raise ValueError("expected seven expectation values")

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


def peaks_to_expectations(peaksets: np.ndarray, calibration: float) -> ExpectationSet:
    """Least-squares solve of the overdetermined 12x7 peak system."""
    if calibration <= 0:
        raise ValueError("calibration must be positive")
    peaks = np.asarray(peaksets, dtype=float).reshape(12)
    design = peak_design_matrix()
    for q in (1, 2, 3):
        block = design[(q - 1) * 4: q * 4]
        if np.linalg.matrix_rank(block) < 4:
            raise ReadoutError(f"peak system deficient for qubit {q}")
    combos = peaks / calibration
    exps, *_ = np.linalg.lstsq(design, combos, rcond=None)
    return ExpectationSet(tuple(float(np.clip(e, -1.0, 1.0)) for e in exps))


def expectations_to_probabilities(exps: ExpectationSet) -> np.ndarray:
    """The eight diagonal elements from the seven expectations:
    rho_ii = (1 + s1<z1> + s2<z2> + s3<z3> + s1s2<z1z2> + ...) / 8 with
    s_k = +1 when bit k of the basis label is 0."""
    e = exps.as_array()
    probs = np.empty(8)
    for i in range(8):
        s = [1 - 2 * ((i >> (2 - k)) & 1) for k in range(3)]
        signs = np.array([s[0], s[1], s[2], s[0] * s[1], s[0] * s[2],
                          s[1] * s[2], s[0] * s[1] * s[2]])
        probs[i] = (1.0 + signs @ e) / 8.0
    return probs


@lru_cache(maxsize=16)
def _calibration_factor(spec_key: tuple, relax: bool, duration_s: float,
                        dwell_s: float) -> float:
    """Pipeline response per unit combination value, fixed by a reference
    experiment on a freshly prepared |000> state (all combos = 4 on the
    up/up line of qubit 1, the others zero)."""
    spec = MoleculeSpec(chemical_shifts_hz=spec_key[0], j_couplings_hz=spec_key[1],
                        t1_s=spec_key[2], t2_s=spec_key[3])
    noise = NoiseConfig(relaxation_enabled=relax, drift_hz_per_s=0.0)
    rho = DensityMatrix.basis_state(0)
    u = embed(rotation(np.pi / 2, np.pi / 2), 1)
    rho = DensityMatrix(u @ rho.matrix @ u.conj().T, validate=False)
    fid = acquire_fid(rho, spec, noise, duration_s, dwell_s)
    peaks = fit_peaks(spectrum(fid), 1, spec)
    return float(peaks[0] / 4.0)


def calibration_factor(spec: MoleculeSpec, noise: NoiseConfig,
                       duration_s: float = DEFAULT_DURATION_S,
                       dwell_s: float = DEFAULT_DWELL_S) -> float:
    key = (spec.chemical_shifts_hz, spec.j_couplings_hz, spec.t1_s, spec.t2_s)
    return _calibration_factor(key, noise.relaxation_enabled, duration_s, dwell_s)


@dataclass
class ReadoutRecord:
    """Everything one diagonal measurement produced, for inspection/export."""

    probabilities: np.ndarray
    expectations: ExpectationSet
    peaks: np.ndarray
    spectra: list[Spectrum]


def measure_diagonal(rho: DensityMatrix, spec: MoleculeSpec, noise: NoiseConfig,
                     frame: FrameState | None = None,
                     duration_s: float = DEFAULT_DURATION_S,
                     dwell_s: float = DEFAULT_DWELL_S,
                     eta_scale: float = 1.0,
                     detail: bool = False):
    """Three readout experiments reconstructing rho_11..rho_88.

    For each qubit a fresh copy of the state gets a frame-adjusted 90-degree
    y readout pulse, an FID acquisition and a peak fit; the pooled peaks are
    solved for the seven expectations and mapped to populations, which are
    clipped to [0, 1] and renormalized. eta_scale divides the calibration to
    report pseudo-pure deviations on the pure-state scale.
    """
    frame = frame or FrameState.zero()
    peaksets = np.empty((3, 4))
    spectra = []
    for q in (1, 2, 3):
        phi0 = frame.phase(q)
        pulse = embed(rotation(np.pi / 2 + phi0, np.pi / 2), q)
        rotated = DensityMatrix(pulse @ rho.matrix @ pulse.conj().T, validate=False)
        fid = acquire_fid(rotated, spec, noise, duration_s, dwell_s,
                          detection_phase=phi0)
        sp = spectrum(fid)
        spectra.append(sp)
        peaksets[q - 1] = fit_peaks(sp, q, spec)
    cal = calibration_factor(spec, noise, duration_s, dwell_s) * eta_scale
    exps = peaks_to_expectations(peaksets, cal)
    probs = expectations_to_probabilities(exps)
    probs = np.clip(probs, 0.0, 1.0)
    total = probs.sum()
    if total <= 0:
        raise ReadoutError("all reconstructed populations vanished")
    probs = probs / total
    if detail:
        return ReadoutRecord(probs, exps, peaksets, spectra)
    return probs


@dataclass(frozen=True)
class SignResult:
    sign: int
    margin: float
    marginal: bool


def sign_experiment(rho: DensityMatrix, spec: MoleculeSpec, noise: NoiseConfig,
                    frame: FrameState | None = None, eta_scale: float = 1.0,
                    noise_floor: float = 1e-3) -> SignResult:
    """Relative sign of the two solution entries of a linear-solver output
    state: rotate qubit 1 by 90 degrees about -y, reconstruct the diagonal,
    and compare the |001> and |101> populations."""
    frame = frame or FrameState.zero()
    axis = 3 * np.pi / 2 + frame.phase(1)
    pulse = embed(rotation(axis, np.pi / 2), 1)
    rotated = DensityMatrix(pulse @ rho.matrix @ pulse.conj().T, validate=False)
    probs = measure_diagonal(rotated, spec, noise, frame,
                             eta_scale=eta_scale)
    margin = float(abs(probs[1] - probs[5]))
    sign = +1 if probs[1] > probs[5] else -1
    return SignResult(sign=sign, margin=margin, marginal=margin < noise_floor)


def detect_peaks(spec_data: Spectrum, threshold_ratio: float = 0.2) -> np.ndarray:
    """Positions of local maxima of the real part above a relative threshold;
    used for structural checks rather than amplitude extraction."""
    y = np.real(spec_data.amplitudes)
    thresh = threshold_ratio * y.max()
    idx = [i for i in range(1, len(y) - 1)
           if y[i] > thresh and y[i] >= y[i - 1] and y[i] > y[i + 1]]
    return spec_data.frequencies_hz[idx]
