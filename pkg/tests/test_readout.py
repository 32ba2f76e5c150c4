"""Spectral readout pipeline: FIDs, spectra, peak fits, reconstruction."""

import numpy as np
import pytest

from trispin.compiler import FrameState, virtual_z
from trispin.gates import rotation
from trispin.pulses import NoiseConfig
from trispin.readout import (
    ExpectationSet,
    ReadoutError,
    acquire_fid,
    calibration_factor,
    detect_peaks,
    expectations_to_probabilities,
    fit_peaks,
    measure_diagonal,
    peak_design_matrix,
    peaks_to_expectations,
    sign_experiment,
    spectrum,
)
from trispin.spincore import (
    DensityMatrix,
    MoleculeSpec,
    embed,
    thermal_state,
    transition_frequencies,
)

NOISELESS = NoiseConfig(relaxation_enabled=False)
RELAXED = NoiseConfig()


def after_y90(rho, qubit, phase=np.pi / 2):
    u = embed(rotation(phase, np.pi / 2), qubit)
    return DensityMatrix(u @ rho.matrix @ u.conj().T, validate=False)


# ------------------------------------------------------------------ FID

def test_diagonal_state_gives_zero_fid():
    spec = MoleculeSpec()
    rho = DensityMatrix.from_populations(np.full(8, 0.125))
    fid = acquire_fid(rho, spec, NOISELESS)
    assert np.max(np.abs(fid.samples)) == 0.0


def test_single_spin_fid_is_decaying_exponential():
    """Oracle: with J = 0 and only qubit 1 excited, the signal is exactly
    exp((i*2*pi*nu1 - 1/T2) t)."""
    spec = MoleculeSpec(chemical_shifts_hz=(123.0, -400.0, 300.0),
                        j_couplings_hz=(0.0, 0.0, 0.0))
    rho = after_y90(DensityMatrix.basis_state(0), 1)
    fid = acquire_fid(rho, spec, RELAXED)
    t = fid.times
    expected = np.exp((2j * np.pi * 123.0 - 1 / spec.t2_s) * t)
    assert np.max(np.abs(fid.samples - expected)) < 1e-12


def test_no_decay_pure_oscillation_peak_bin():
    """T2 off: an isolated 100 Hz spin peaks exactly in the 100 Hz bin."""
    spec = MoleculeSpec(chemical_shifts_hz=(100.0, -400.0, 300.0),
                        j_couplings_hz=(0.0, 0.0, 0.0))
    rho = after_y90(DensityMatrix.basis_state(0), 1)
    fid = acquire_fid(rho, spec, NOISELESS)
    sp = spectrum(fid)
    peak_bin = np.argmax(np.real(sp.amplitudes))
    assert sp.frequencies_hz[peak_bin] == pytest.approx(100.0, abs=1e-9)


def test_acquisition_window_guard():
    spec = MoleculeSpec()
    rho = DensityMatrix.basis_state(0)
    with pytest.raises(ValueError):
        acquire_fid(rho, spec, RELAXED, duration_s=0.5)  # < 5*T2


# ------------------------------------------------------------------ spectrum

def test_zero_fid_zero_spectrum():
    spec = MoleculeSpec()
    rho = DensityMatrix.maximally_mixed()
    sp = spectrum(acquire_fid(rho, spec, NOISELESS))
    assert np.max(np.abs(sp.amplitudes)) == 0.0


def test_lorentzian_peak_at_line_position():
    spec = MoleculeSpec(chemical_shifts_hz=(150.0, -400.0, 300.0),
                        j_couplings_hz=(0.0, 0.0, 0.0))
    rho = after_y90(DensityMatrix.basis_state(0), 1)
    sp = spectrum(acquire_fid(rho, spec, RELAXED), pad=4)
    peak = sp.frequencies_hz[np.argmax(np.real(sp.amplitudes))]
    assert peak == pytest.approx(150.0, abs=0.25)


def test_parseval():
    spec = MoleculeSpec()
    rho = after_y90(thermal_state(spec, 0.2), 2)
    fid = acquire_fid(rho, spec, RELAXED)
    sp = spectrum(fid)
    n = len(fid.samples)
    time_energy = np.sum(np.abs(fid.samples) ** 2) / n
    freq_energy = np.sum(np.abs(sp.amplitudes) ** 2)
    assert freq_energy == pytest.approx(time_energy, rel=1e-9)


def test_spectrum_grid_spans_nyquist():
    spec = MoleculeSpec()
    fid = acquire_fid(DensityMatrix.maximally_mixed(), spec, NOISELESS)
    sp = spectrum(fid)
    assert sp.frequencies_hz[0] == pytest.approx(-1 / (2 * fid.dwell_s))
    assert np.all(np.diff(sp.frequencies_hz) > 0)


# ------------------------------------------------------------------ peaks

def test_peak_positions_demo_couplings():
    """Qubit 1 lines sit at nu1 + {(-128+68), (-128-68), (128+68), (128-68)}/2."""
    spec = MoleculeSpec()
    freqs = transition_frequencies(spec, 1)
    nu1 = spec.chemical_shifts_hz[0]
    expected = nu1 + np.array([-128 + 68, -128 - 68, 128 + 68, 128 - 68]) / 2
    assert np.allclose(sorted(freqs), sorted(expected))
    # label order: (up,up), (up,down), (down,up), (down,down)
    assert freqs[0] == pytest.approx(nu1 + (-128 + 68) / 2)
    assert freqs[1] == pytest.approx(nu1 + (-128 - 68) / 2)
    assert freqs[2] == pytest.approx(nu1 + (128 + 68) / 2)
    assert freqs[3] == pytest.approx(nu1 + (128 - 68) / 2)


def test_mixed_state_has_no_peaks():
    spec = MoleculeSpec()
    rho = after_y90(DensityMatrix.maximally_mixed(), 1)
    sp = spectrum(acquire_fid(rho, spec, NOISELESS))
    peaks = fit_peaks(sp, 1, spec)
    assert np.max(np.abs(peaks)) < 1e-12


def test_ground_state_single_dominant_line():
    """|000> after the qubit-1 readout pulse lights up only the (up,up)
    line; oracle is the full pipeline against the direct expectation."""
    spec = MoleculeSpec()
    rho = after_y90(DensityMatrix.basis_state(0), 1)
    sp = spectrum(acquire_fid(rho, spec, NOISELESS))
    peaks = fit_peaks(sp, 1, spec)
    assert peaks[0] > 100 * max(1e-15, np.max(np.abs(peaks[1:])))


def test_unresolved_peaks_raise():
    spec = MoleculeSpec(j_couplings_hz=(-0.5, 0.4, 0.3))  # splittings < 2 linewidths
    rho = after_y90(DensityMatrix.basis_state(0), 1)
    sp = spectrum(acquire_fid(rho, spec, NOISELESS))
    with pytest.raises(ReadoutError):
        fit_peaks(sp, 1, spec)


# ----------------------------------------------------- expectations solve

def test_design_matrix_full_rank():
    d = peak_design_matrix()
    assert d.shape == (12, 7)
    assert np.linalg.matrix_rank(d) == 7


def test_zero_peaks_zero_expectations():
    exps = peaks_to_expectations(np.zeros((3, 4)), calibration=1.0)
    assert np.allclose(exps.as_array(), 0.0)


def test_single_z1_expectation_gives_equal_qubit1_peaks():
    """With only <z1> = 1 the four qubit-1 lines have equal amplitude:
    the four listed combinations all reduce to <z1>."""
    e = np.zeros(7)
    e[0] = 1.0
    d = peak_design_matrix()
    combos = d @ e
    assert np.allclose(combos[:4], 1.0)
    assert np.allclose(combos[4:], 0.0)


def test_pipeline_expectations_for_ground_state():
    """Full pipeline on |000> returns all seven expectations = +1."""
    spec = MoleculeSpec()
    rho = DensityMatrix.basis_state(0)
    peaksets = []
    for q in (1, 2, 3):
        rotated = after_y90(rho, q)
        sp = spectrum(acquire_fid(rotated, spec, NOISELESS))
        peaksets.append(fit_peaks(sp, q, spec))
    cal = calibration_factor(spec, NOISELESS)
    exps = peaks_to_expectations(np.array(peaksets), cal)
    assert np.allclose(exps.as_array(), 1.0, atol=1e-3)


def test_qubit1_combination_table_matches_listed_forms():
    """The oracle-derived peak-to-combination table for qubit 1, checked
    against the four known combinations (in label order up/up, up/down,
    down/up, down/down):
        <z1>+<z1z2>+<z1z3>+<z123>, <z1>+<z1z2>-<z1z3>-<z123>,
        <z1>-<z1z2>+<z1z3>-<z123>, <z1>-<z1z2>-<z1z3>+<z123>."""
    d = peak_design_matrix()[:4]
    # columns: z1 z2 z3 z12 z13 z23 z123
    expected = np.array([
        [1, 0, 0, +1, +1, 0, +1],
        [1, 0, 0, +1, -1, 0, -1],
        [1, 0, 0, -1, +1, 0, -1],
        [1, 0, 0, -1, -1, 0, +1],
    ])
    assert np.array_equal(d, expected)


def test_expectations_to_probabilities_corner():
    """All seven expectations = 1 puts everything in |000>: (1+7)/8 = 1."""
    probs = expectations_to_probabilities(ExpectationSet(tuple([1.0] * 7)))
    assert probs[0] == pytest.approx(1.0)
    assert np.allclose(probs[1:], 0.0, atol=1e-12)


def test_rho22_formula_signs():
    """rho_22 = (1 + z1 + z2 - z3 + z12 - z13 - z23 - z123)/8."""
    rng = np.random.default_rng(0)
    e = rng.uniform(-1, 1, 7)
    probs = expectations_to_probabilities(ExpectationSet(tuple(e)))
    manual = (1 + e[0] + e[1] - e[2] + e[3] - e[4] - e[5] - e[6]) / 8
    assert probs[1] == pytest.approx(manual, abs=1e-12)


# ------------------------------------------------------- measure_diagonal

def test_measure_diagonal_mixed_state():
    spec = MoleculeSpec()
    probs = measure_diagonal(DensityMatrix.maximally_mixed(), spec, NOISELESS)
    assert np.allclose(probs, 0.125, atol=1e-9)


def test_measure_diagonal_basis_state():
    spec = MoleculeSpec()
    probs = measure_diagonal(DensityMatrix.basis_state(5), spec, NOISELESS)
    expected = np.zeros(8)
    expected[5] = 1.0
    assert np.max(np.abs(probs - expected)) < 1e-3


def test_measure_diagonal_random_states_roundtrip():
    rng = np.random.default_rng(99)
    spec = MoleculeSpec()
    for _ in range(10):
        p = rng.random(8)
        p /= p.sum()
        rho = DensityMatrix.from_populations(p)
        out = measure_diagonal(rho, spec, NOISELESS)
        assert np.max(np.abs(out - p)) < 1e-3
        out_t2 = measure_diagonal(rho, spec, RELAXED)
        assert np.max(np.abs(out_t2 - p)) < 1e-2


def test_measure_diagonal_frame_invariant_for_diagonal_states():
    """Reference-frame offsets rotate both the readout pulse and the
    detector; diagonal states must reconstruct identically."""
    spec = MoleculeSpec()
    rng = np.random.default_rng(4)
    p = rng.random(8)
    p /= p.sum()
    rho = DensityMatrix.from_populations(p)
    base = measure_diagonal(rho, spec, NOISELESS)
    frame = FrameState.zero()
    for q, angle in ((1, 1.1), (2, -2.3), (3, 0.7)):
        frame = virtual_z(frame, q, angle)
    shifted = measure_diagonal(rho, spec, NOISELESS, frame)
    assert np.max(np.abs(base - shifted)) < 1e-9


def test_measure_diagonal_probability_vector():
    spec = MoleculeSpec()
    rho = thermal_state(spec, 0.3)
    probs = measure_diagonal(rho, spec, RELAXED)
    assert probs.min() >= 0.0
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_eta_scale_recovers_pseudo_pure_readout():
    """A weak pseudo-pure state read out with the 1/eta calibration looks
    like the underlying pure state."""
    spec = MoleculeSpec()
    eta = 2e-5
    m = (1 - eta) / 8 * np.eye(8, dtype=complex)
    m[0, 0] += eta
    rho = DensityMatrix(m)
    probs = measure_diagonal(rho, spec, NOISELESS, eta_scale=eta)
    expected = np.zeros(8)
    expected[0] = 1.0
    assert np.max(np.abs(probs - expected)) < 1e-6


# ------------------------------------------------------- sign experiment

def sign_test_state(s):
    """Data-qubit state (|001> + s|101>)/sqrt(2): solver output with both
    entries equal and relative sign s."""
    v = np.zeros(8, complex)
    v[1] = 1 / np.sqrt(2)
    v[5] = s / np.sqrt(2)
    return DensityMatrix.pure(v)


def test_sign_experiment_positive():
    spec = MoleculeSpec()
    result = sign_experiment(sign_test_state(+1), spec, NOISELESS)
    assert result.sign == +1
    assert not result.marginal


def test_sign_experiment_negative():
    spec = MoleculeSpec()
    result = sign_experiment(sign_test_state(-1), spec, NOISELESS)
    assert result.sign == -1
    assert not result.marginal


def test_sign_experiment_flags_marginal():
    spec = MoleculeSpec()
    v = np.zeros(8, complex)
    v[1] = 1.0  # no coherence: rotated populations equal
    result = sign_experiment(DensityMatrix.pure(v), spec, NOISELESS)
    assert result.marginal


# ------------------------------------------------------- peak detection

def test_thermal_global_90_shows_twelve_peaks():
    """Thermal state after the global hard 90 pulse: four resolved lines per
    qubit at nu_q +/- J_qa/2 +/- J_qb/2 (criterion for spectrum structure)."""
    spec = MoleculeSpec()
    rho = thermal_state(spec, 1e-5)
    for q in (1, 2, 3):
        rho = after_y90(rho, q)
    sp = spectrum(acquire_fid(rho, spec, RELAXED), pad=2)
    found = np.sort(detect_peaks(sp, threshold_ratio=0.2))
    expected = np.sort(np.concatenate(
        [transition_frequencies(spec, q) for q in (1, 2, 3)]))
    assert len(found) == 12
    bin_width = 1.0 / (len(sp.source_samples) * sp.dwell_s) / 2  # padded grid
    assert np.max(np.abs(found - expected)) <= bin_width + 1e-9


def test_peak_positions_invariant_under_state():
    """Positions depend only on the molecule; amplitudes carry the state."""
    spec = MoleculeSpec()
    rng = np.random.default_rng(6)
    reference = transition_frequencies(spec, 2)
    for _ in range(5):
        p = rng.random(8)
        rho = after_y90(DensityMatrix.from_populations(p / p.sum()), 2)
        sp = spectrum(acquire_fid(rho, spec, RELAXED), pad=2)
        found = detect_peaks(sp, threshold_ratio=0.15)
        grid = sp.frequencies_hz[1] - sp.frequencies_hz[0]
        for f in found:
            assert np.min(np.abs(reference - f)) <= grid + 1e-9


def test_expectations_clipped_to_physical_range():
    peaks = np.zeros((3, 4))
    peaks[0, :] = 10.0  # absurdly large qubit-1 amplitudes
    exps = peaks_to_expectations(peaks, calibration=1e-3)
    assert np.all(np.abs(exps.as_array()) <= 1.0 + 1e-12)


def test_roundtrip_on_non_commensurate_profile():
    """Arbitrary (distinct, in-window) shifts keep the reconstruction exact:
    peak evaluation uses the exact single-frequency transform, not the grid."""
    odd_spec = MoleculeSpec(chemical_shifts_hz=(-713.3, -151.7, 433.9))
    rng = np.random.default_rng(31)
    for _ in range(5):
        p = rng.random(8)
        p /= p.sum()
        rho = DensityMatrix.from_populations(p)
        out = measure_diagonal(rho, odd_spec, NOISELESS)
        assert np.max(np.abs(out - p)) < 1e-3
        out_t2 = measure_diagonal(rho, odd_spec, RELAXED)
        assert np.max(np.abs(out_t2 - p)) < 1e-2


def test_lines_outside_window_raise():
    wide = MoleculeSpec(chemical_shifts_hz=(-800.0, -200.0, 1900.0))
    rho = after_y90(DensityMatrix.basis_state(0), 3)
    sp = spectrum(acquire_fid(rho, wide, NOISELESS))
    with pytest.raises(ReadoutError, match="window"):
        fit_peaks(sp, 3, wide)


def test_spectrum_csv_export():
    spec = MoleculeSpec()
    rho = after_y90(DensityMatrix.basis_state(0), 1)
    sp = spectrum(acquire_fid(rho, spec, RELAXED))
    csv = sp.to_csv()
    lines = csv.strip().splitlines()
    assert lines[0] == "frequency_hz,real,imag"
    assert len(lines) == len(sp.frequencies_hz) + 1
    f, re_part, im_part = lines[1].split(",")
    float(f), float(re_part), float(im_part)  # parse cleanly
