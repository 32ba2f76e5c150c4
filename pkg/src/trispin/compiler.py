"""Compilation of circuits to pulse-level schedules.

Z-family gates cost nothing: an Rz(a) rotates the per-qubit reference frame
by -a and every later pulse on that qubit is played with its axis phase
shifted so the rotation lands on the intended axis in the shifted frame.
Arbitrary x/y rotations conjugate a virtual z-rotation between two library
90-degree pulses. Multi-qubit pulses absorb the target qubit's frame as a
global phase offset on the waveform (exact, since the drift is diagonal);
CZ and CCZ are frame-invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gates import Gate, R90_KINDS, VIRTUAL_KINDS
from .spincore import IZ

TWO_PI = 2.0 * np.pi

JZ_TOTAL = IZ[0] + IZ[1] + IZ[2]


class CompileError(Exception):
    pass


@dataclass(frozen=True)
class FrameState:
    """Per-qubit reference phases phi0, normalized to [0, 2*pi)."""

    reference_phase: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "reference_phase",
                           tuple(float(p) % TWO_PI for p in self.reference_phase))

    @classmethod
    def zero(cls) -> "FrameState":
        return cls()

    def phase(self, qubit: int) -> float:
        return self.reference_phase[qubit - 1]

    def accumulated_z(self, qubit: int) -> float:
        """Pending z-rotation angle on this qubit (what a trailing physical
        Rz would have to apply to realize the circuit exactly)."""
        return (-self.reference_phase[qubit - 1]) % TWO_PI


def virtual_z(frame: FrameState, qubit: int, angle: float) -> FrameState:
    """Rz(angle) realized by rotating the qubit's reference frame by -angle."""
    if qubit not in (1, 2, 3):
        raise ValueError(f"qubit must be 1..3, got {qubit}")
    phases = list(frame.reference_phase)
    phases[qubit - 1] = (phases[qubit - 1] - angle) % TWO_PI
    return FrameState(tuple(phases))


def effective_phase(frame: FrameState, qubit: int, nominal_phase: float) -> float:
    """Phase to program into a pulse so its rotation axis lands at
    nominal_phase in the qubit's current reference frame."""
    return (nominal_phase + frame.phase(qubit)) % TWO_PI


@dataclass(frozen=True)
class PulsePlay:
    """One library pulse played with a phase offset folded in."""

    key: str
    phase_offset: float
    gate_label: str
    duration_s: float


@dataclass(frozen=True)
class FrameShift:
    qubit: int
    angle: float
    gate_label: str = ""


@dataclass(frozen=True)
class Delay:
    duration_s: float


@dataclass
class Schedule:
    actions: list = field(default_factory=list)
    initial_frame: FrameState = field(default_factory=FrameState.zero)
    final_frame: FrameState = field(default_factory=FrameState.zero)

    @property
    def total_duration(self) -> float:
        return sum(a.duration_s for a in self.actions if not isinstance(a, FrameShift))

    def pulse_count(self) -> int:
        return sum(1 for a in self.actions if isinstance(a, PulsePlay))


# gate kind -> (library key template, nominal axis phase). The same physical
# pulse serves every equatorial axis: offsetting all segment phases by delta
# turns an x-axis pulse into one about the axis at delta.
_AXIS_Y = np.pi / 2


def _require(library, key: str, gate_label: str):
    if not library.has(key):
        raise CompileError(f"pulse library has no entry {key!r} required by gate {gate_label}")


def _play(library, frame: FrameState, key: str, axis_qubit: int,
          nominal_phase: float, label: str) -> PulsePlay:
    _require(library, key, label)
    offset = effective_phase(frame, axis_qubit, nominal_phase)
    return PulsePlay(key=key, phase_offset=offset, gate_label=label,
                     duration_s=library.duration(key))


def _compile_gate(gate: Gate, library, frame: FrameState) -> tuple[list, FrameState]:
    """Actions plus the frame threaded past this gate."""
    label = gate.label()
    k = gate.kind

    if k in VIRTUAL_KINDS:
        q = gate.qubits[0]
        angle = {"Z": np.pi, "T": np.pi / 4, "Tdag": -np.pi / 4}.get(k, gate.angle)
        return [FrameShift(q, angle, label)], virtual_z(frame, q, angle)

    if k in ("X", "Y"):
        q = gate.qubits[0]
        nominal = 0.0 if k == "X" else _AXIS_Y
        return [_play(library, frame, f"X{q}", q, nominal, label)], frame

    if k == "H":
        q = gate.qubits[0]
        return [_play(library, frame, f"H{q}", q, 0.0, label)], frame

    if k in R90_KINDS:
        q = gate.qubits[0]
        base = 0.0 if k == "R90x" else _AXIS_Y
        nominal = base if gate.angle > 0 else base + np.pi
        return [_play(library, frame, f"R90x{q}", q, nominal, label)], frame

    if k in ("Rx", "Ry"):
        q = gate.qubits[0]
        base = 0.0 if k == "Rx" else _AXIS_Y
        theta = gate.angle
        # Strength reduction: +-pi plays the Pauli pulse, +-pi/2 the 90 pulse.
        if abs(abs(theta) - np.pi) < 1e-12:
            nominal = base if theta > 0 else base + np.pi
            return [_play(library, frame, f"X{q}", q, nominal, label)], frame
        if abs(abs(theta) - np.pi / 2) < 1e-12:
            nominal = base if theta > 0 else base + np.pi
            return [_play(library, frame, f"R90x{q}", q, nominal, label)], frame
        return _compile_xy_conjugation(q, k, theta, library, frame, label)

    if k == "CNOT":
        c, t = gate.qubits
        return [_play(library, frame, f"CNOT{c}{t}", t, 0.0, label)], frame

    if k == "CZ":
        a, b = sorted(gate.qubits)
        _require(library, f"CZ{a}{b}", label)
        return [PulsePlay(f"CZ{a}{b}", 0.0, label, library.duration(f"CZ{a}{b}"))], frame

    if k == "Toffoli":
        c1, c2, t = gate.qubits
        key = f"TOFFOLI{min(c1, c2)}{max(c1, c2)}{t}"
        return [_play(library, frame, key, t, 0.0, label)], frame

    if k == "CCZ":
        _require(library, "CCZ", label)
        return [PulsePlay("CCZ", 0.0, label, library.duration("CCZ"))], frame

    raise CompileError(f"cannot compile gate kind {k!r}")


def _compile_xy_conjugation(qubit: int, kind: str, angle: float, library,
                            frame: FrameState, label: str) -> tuple[list, FrameState]:
    """Arbitrary Rx/Ry via 90-pulse conjugation of a virtual z-rotation:
    Rx(a) = R_y(pi/2) Rz(a) R_y(-pi/2), Ry(a) = R_x(-pi/2) Rz(a) R_x(pi/2)."""
    if kind == "Rx":
        open_phase, close_phase = 3 * np.pi / 2, np.pi / 2   # -y then +y
    else:
        open_phase, close_phase = 0.0, np.pi                 # +x then -x
    actions = [_play(library, frame, f"R90x{qubit}", qubit, open_phase, label)]
    frame = virtual_z(frame, qubit, angle)
    actions.append(FrameShift(qubit, angle, label))
    actions.append(_play(library, frame, f"R90x{qubit}", qubit, close_phase, label))
    return actions, frame


def compile_arbitrary_xy(qubit: int, axis: str, angle: float,
                         frame: FrameState, library) -> Schedule:
    """Schedule for an arbitrary-angle x or y rotation on one qubit."""
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    if not -TWO_PI < angle < TWO_PI:
        raise ValueError("angle must lie in (-2*pi, 2*pi)")
    kind = "Rx" if axis == "x" else "Ry"
    actions, final = _compile_xy_conjugation(qubit, kind, angle, library, frame,
                                             f"{kind}{qubit}({angle:.4g})")
    return Schedule(actions, initial_frame=frame, final_frame=final)


def compile_circuit(circuit, library, frame: FrameState | None = None) -> Schedule:
    """Left-to-right compilation of a circuit, threading the frame through."""
    frame = frame or FrameState.zero()
    schedule = Schedule(initial_frame=frame)
    for gate in circuit.gates:
        actions, frame = _compile_gate(gate, library, frame)
        schedule.actions.extend(actions)
    schedule.final_frame = frame
    return schedule


def pending_z_unitary(initial: FrameState, final: FrameState) -> np.ndarray:
    """Trailing z-rotations accumulated between two frame states: applied
    after the played pulses they recover the circuit unitary,
    U_circuit = pending @ U_played (up to global phase)."""
    from .gates import Gate, gate_unitary

    u = np.eye(8, dtype=complex)
    for q in (1, 2, 3):
        pending = final.accumulated_z(q) - initial.accumulated_z(q)
        u = gate_unitary(Gate("Rz", (q,), pending)) @ u
    return u


def frame_correction_unitary(schedule: Schedule) -> np.ndarray:
    return pending_z_unitary(schedule.initial_frame, schedule.final_frame)


def schedule_unitary(schedule: Schedule, library, include_frame_correction: bool = True) -> np.ndarray:
    """Propagator of the schedule using the library's realized unitaries,
    with each pulse's phase offset applied as the exact Jz conjugation."""
    import scipy.linalg

    u = np.eye(8, dtype=complex)
    for action in schedule.actions:
        if isinstance(action, PulsePlay):
            base = library.unitary(action.key)
            if action.phase_offset != 0.0:
                rot = scipy.linalg.expm(-1j * action.phase_offset * JZ_TOTAL)
                base = rot @ base @ rot.conj().T
            u = base @ u
    if include_frame_correction:
        u = frame_correction_unitary(schedule) @ u
    return u
