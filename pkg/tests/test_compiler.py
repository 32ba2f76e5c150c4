"""Frame tracking, virtual z-rotations, and circuit compilation."""

import numpy as np
import pytest

from trispin.circuits import Circuit, simulate_ideal
from trispin.compiler import (
    pending_z_unitary,
    CompileError,
    FrameShift,
    FrameState,
    PulsePlay,
    compile_arbitrary_xy,
    compile_circuit,
    effective_phase,
    schedule_unitary,
    virtual_z,
)
from trispin.gates import Gate, gate_unitary, phase_invariant_distance
from trispin.library import PulseLibrary
from trispin.spincore import MoleculeSpec


@pytest.fixture(scope="module")
def lib(ideal_library):
    return ideal_library


def circuit_unitary(gates):
    u = np.eye(8, dtype=complex)
    for g in gates:
        u = gate_unitary(g) @ u
    return u


# ------------------------------------------------------------- frame basics

def test_virtual_z_zero_angle_is_noop():
    f = FrameState.zero()
    assert virtual_z(f, 2, 0.0) == f


def test_virtual_z_rotates_frame_by_minus_angle():
    """Rz(pi/2) rotates the reference frame by -pi/2."""
    f = virtual_z(FrameState.zero(), 1, np.pi / 2)
    assert f.phase(1) == pytest.approx(3 * np.pi / 2)  # -pi/2 mod 2*pi
    assert f.phase(2) == 0.0


def test_virtual_z_inverse_composition():
    f = FrameState.zero()
    f = virtual_z(f, 3, 1.234)
    f = virtual_z(f, 3, -1.234)
    assert f == FrameState.zero()


def test_effective_phase_zero_frame():
    assert effective_phase(FrameState.zero(), 1, 0.7) == pytest.approx(0.7)


def test_effective_phase_periodic():
    f1 = virtual_z(FrameState.zero(), 2, 2 * np.pi)
    assert effective_phase(f1, 2, 0.3) == pytest.approx(0.3, abs=1e-12)


# --------------------------------------------------- arbitrary x/y rotations

def test_compile_xy_zero_angle_is_identity(lib):
    sched = compile_arbitrary_xy(1, "x", 0.0, FrameState.zero(), lib)
    u = schedule_unitary(sched, lib)
    assert phase_invariant_distance(np.eye(8, dtype=complex), u) < 1e-12


@pytest.mark.parametrize("axis,angle,ref_kind", [
    ("x", np.pi, "X"),
    ("y", np.pi / 2, "R90y"),
])
def test_compile_xy_matches_library_unitaries(lib, axis, angle, ref_kind):
    """Oracle: direct matrix comparison against the textbook gate."""
    sched = compile_arbitrary_xy(2, axis, angle, FrameState.zero(), lib)
    u = schedule_unitary(sched, lib)
    ref = gate_unitary(Gate(ref_kind, (2,), angle if ref_kind.startswith("R90") else None))
    assert phase_invariant_distance(ref, u) < 1e-9


def test_compile_xy_random_angles(lib):
    rng = np.random.default_rng(8)
    for _ in range(10):
        angle = rng.uniform(-2 * np.pi + 0.01, 2 * np.pi - 0.01)
        axis = rng.choice(["x", "y"])
        q = int(rng.integers(1, 4))
        sched = compile_arbitrary_xy(q, axis, angle, FrameState.zero(), lib)
        u = schedule_unitary(sched, lib)
        ref = gate_unitary(Gate("Rx" if axis == "x" else "Ry", (q,), angle))
        assert phase_invariant_distance(ref, u) < 1e-9


# ----------------------------------------------------------- whole circuits

def test_empty_circuit_compiles_empty(lib):
    sched = compile_circuit(Circuit(()), lib)
    assert sched.actions == []
    assert sched.total_duration == 0.0


def test_virtual_z_gate_sandwich_matches_composite(lib):
    """Rx(theta) - Rz(pi/2) - Rx(gamma) compiles to a schedule equal to the
    ideal composite unitary."""
    theta, gamma = 0.77, 1.31
    gates = (Gate("Rx", (1,), theta), Gate("Rz", (1,), np.pi / 2),
             Gate("Rx", (1,), gamma))
    sched = compile_circuit(Circuit(gates), lib)
    u = schedule_unitary(sched, lib)
    ref = circuit_unitary(gates)
    assert phase_invariant_distance(ref, u) < 1e-9


def test_pulse_after_virtual_z_plays_on_minus_y(lib):
    """An x pulse following a virtual Rz(pi/2) is physically played about
    the -y axis (phase offset -pi/2)."""
    gates = (Gate("X", (1,)), Gate("Rz", (1,), np.pi / 2), Gate("X", (1,)))
    sched = compile_circuit(Circuit(gates), lib)
    plays = [a for a in sched.actions if isinstance(a, PulsePlay)]
    assert len(plays) == 2
    assert plays[0].phase_offset == pytest.approx(0.0)
    assert plays[1].phase_offset == pytest.approx(3 * np.pi / 2)


def test_rx_rz_rx_reduction_identity(lib):
    """The same sandwich must equal Rx(theta) then R_{-y}(gamma) followed by
    the trailing virtual z."""
    theta, gamma = 0.77, 1.31
    gates = (Gate("Rx", (1,), theta), Gate("Rz", (1,), np.pi / 2),
             Gate("Rx", (1,), gamma))
    played_equiv = circuit_unitary((Gate("Rx", (1,), theta),))
    rminus_y = gate_unitary(Gate("Ry", (1,), -gamma))
    expect = gate_unitary(Gate("Rz", (1,), np.pi / 2)) @ rminus_y @ played_equiv
    ref = circuit_unitary(gates)
    assert phase_invariant_distance(ref, expect) < 1e-12


def test_ghz_compiles_to_ghz_populations(lib):
    """Oracle: statevector simulation of the compiled schedule."""
    circ = Circuit((Gate("H", (1,)), Gate("CNOT", (1, 2)), Gate("CNOT", (2, 3))))
    sched = compile_circuit(circ, lib)
    u = schedule_unitary(sched, lib)
    state = u @ np.eye(8)[0].astype(complex)
    pops = np.abs(state) ** 2
    assert pops[0] == pytest.approx(0.5, abs=1e-12)
    assert pops[7] == pytest.approx(0.5, abs=1e-12)
    assert np.max(pops[1:7]) < 1e-12


ALL_GATES = (
    [Gate(k, (q,)) for k in ("X", "Y", "Z", "H", "T", "Tdag") for q in (1, 2, 3)]
    + [Gate(k, (q,), a) for k in ("Rx", "Ry", "Rz") for q in (1, 2, 3)
       for a in (0.3, -1.2)]
    + [Gate(k, (q,), s * np.pi / 2) for k in ("R90x", "R90y", "R90z")
       for q in (1, 2, 3) for s in (+1, -1)]
    + [Gate("CNOT", p) for p in ((1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2))]
    + [Gate("CZ", p) for p in ((1, 2), (1, 3), (2, 3))]
    + [Gate("Toffoli", p) for p in ((2, 3, 1), (1, 3, 2), (1, 2, 3))]
    + [Gate("CCZ", (1, 2, 3))]
)


@pytest.mark.parametrize("gate", ALL_GATES, ids=lambda g: g.label())
def test_every_gate_compiles_to_its_unitary(lib, gate):
    sched = compile_circuit(Circuit((gate,)), lib)
    u = schedule_unitary(sched, lib)
    assert phase_invariant_distance(gate_unitary(gate), u) < 1e-9


def test_random_sequence_frame_associativity(lib):
    """Compiling AB equals compiling A then B with the threaded frame."""
    rng = np.random.default_rng(17)
    pool = ALL_GATES
    for trial in range(6):
        gates = tuple(pool[i] for i in rng.integers(0, len(pool), 20))
        full = compile_circuit(Circuit(gates), lib)
        u_full = schedule_unitary(full, lib)
        ref = circuit_unitary(gates)
        assert phase_invariant_distance(ref, u_full) < 1e-8
        # split: compile the halves threading the frame; the pending-z
        # correction spans the whole run
        a, b = gates[:10], gates[10:]
        sa = compile_circuit(Circuit(a), lib)
        sb = compile_circuit(Circuit(b), lib, frame=sa.final_frame)
        u_split = (pending_z_unitary(FrameState.zero(), sb.final_frame)
                   @ schedule_unitary(sb, lib, include_frame_correction=False)
                   @ schedule_unitary(sa, lib, include_frame_correction=False))
        assert phase_invariant_distance(ref, u_split) < 1e-8


def test_virtual_z_contributes_zero_duration(lib):
    circ = Circuit((Gate("Rz", (1,), 0.4), Gate("T", (2,)), Gate("Z", (3,))))
    sched = compile_circuit(circ, lib)
    assert sched.total_duration == 0.0
    assert all(isinstance(a, FrameShift) for a in sched.actions)


def test_missing_library_entry_names_gate(molecule):
    empty = PulseLibrary(molecule, {})
    with pytest.raises(CompileError, match="X2"):
        compile_circuit(Circuit((Gate("X", (2,)),)), empty)


def test_simulate_ideal_ghz():
    circ = Circuit((Gate("H", (1,)), Gate("CNOT", (1, 2)), Gate("CNOT", (2, 3))))
    probs = simulate_ideal(circ)
    assert probs[0] == pytest.approx(0.5)
    assert probs[7] == pytest.approx(0.5)
