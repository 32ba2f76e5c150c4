"""Desk-scale emulator of a three-qubit NMR quantum computer.

Simulates the three-spin system at the pulse level, synthesizes the native
gate set with gradient-ascent pulse engineering, prepares pseudo-pure
states, reconstructs measurements through the spectral readout pipeline,
and runs circuits through a CLI, a job service, and a web composer UI.
"""

from .circuits import (
    Builtin,
    Circuit,
    HhlProblem,
    HhlSolution,
    builtin_circuits,
    diagonalize_2x2,
    extract_solution,
    hhl_circuit,
    hhl_reference,
    simulate_ideal,
)
from .compiler import (
    FrameState,
    Schedule,
    compile_arbitrary_xy,
    compile_circuit,
    effective_phase,
    virtual_z,
)
from .engine import Job, JobStore, SystemProfile, marginalize, run_job
from .gates import Gate, gate_unitary
from .grape import GrapeConfig, SynthesisResult, fidelity_gradient, gate_fidelity, synthesize
from .library import PulseLibrary, build_library
from .pps import PpsConfig, PpsReport, fit_eta, permutation_unitary, prepare_pps
from .pulses import (
    FULL_SCALE_HZ,
    NoiseConfig,
    PulseSegment,
    Waveform,
    control_hamiltonian,
    evolve,
    free_evolution,
    propagator,
    quantize,
)
from .readout import (
    ExpectationSet,
    Fid,
    Spectrum,
    acquire_fid,
    fit_peaks,
    measure_diagonal,
    peaks_to_expectations,
    sign_experiment,
    spectrum,
)
from .spincore import (
    DensityMatrix,
    MoleculeSpec,
    build_drift_hamiltonian,
    diagonal_probabilities,
    expectation,
    thermal_state,
)

__version__ = "0.1.0"
