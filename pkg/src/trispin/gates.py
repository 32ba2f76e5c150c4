"""User-visible gate set and textbook unitaries.

Conventions: qubit 1 is the most significant bit; for CNOT and Toffoli the
last qubit listed is the target; CZ and CCZ are symmetric. Rotation gates
are R_n(theta) = exp(-i*theta*n.sigma/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spincore import IDENTITY_8, SIGMA_X, SIGMA_Y, SIGMA_Z, embed

SINGLE_QUBIT_KINDS = {"X", "Y", "Z", "H", "T", "Tdag", "Rx", "Ry", "Rz", "R90x", "R90y", "R90z"}
TWO_QUBIT_KINDS = {"CNOT", "CZ"}
THREE_QUBIT_KINDS = {"Toffoli", "CCZ"}
GATE_KINDS = SINGLE_QUBIT_KINDS | TWO_QUBIT_KINDS | THREE_QUBIT_KINDS

#: Kinds whose angle field is required (Rx/Ry/Rz) or optional-signed (R90*).
ANGLE_KINDS = {"Rx", "Ry", "Rz"}
R90_KINDS = {"R90x", "R90y", "R90z"}

#: Kinds compiled as pure reference-frame shifts (zero duration, no pulse).
VIRTUAL_KINDS = {"Z", "T", "Tdag", "Rz", "R90z"}

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
T_GATE = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)]).astype(complex)


def rotation(axis_phase: float, theta: float) -> np.ndarray:
    """Rotation by theta about the equatorial axis at angle axis_phase."""
    n = np.cos(axis_phase) * SIGMA_X + np.sin(axis_phase) * SIGMA_Y
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * n


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if any(q not in (1, 2, 3) for q in self.qubits):
            raise ValueError(f"qubit indices must be in 1..3, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"qubit indices must be distinct, got {self.qubits}")
        expected = 1 if self.kind in SINGLE_QUBIT_KINDS else 2 if self.kind in TWO_QUBIT_KINDS else 3
        if len(self.qubits) != expected:
            raise ValueError(f"{self.kind} takes {expected} qubit(s), got {len(self.qubits)}")
        if self.kind in ANGLE_KINDS:
            if self.angle is None:
                raise ValueError(f"{self.kind} requires an angle")
        elif self.kind in R90_KINDS:
            if self.angle is None:
                object.__setattr__(self, "angle", np.pi / 2)
            elif abs(abs(self.angle) - np.pi / 2) > 1e-9:
                raise ValueError(f"{self.kind} angle must be +/- pi/2")
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def label(self) -> str:
        qs = "".join(str(q) for q in self.qubits)
        if self.kind in ANGLE_KINDS:
            return f"{self.kind}{qs}({self.angle:.4g})"
        if self.kind in R90_KINDS and self.angle < 0:
            return f"{self.kind}{qs}(-)"
        return f"{self.kind}{qs}"


def _single_matrix(gate: Gate) -> np.ndarray:
    k, a = gate.kind, gate.angle
    if k == "X":
        return SIGMA_X
    if k == "Y":
        return SIGMA_Y
    if k == "Z":
        return SIGMA_Z
    if k == "H":
        return HADAMARD
    if k == "T":
        return T_GATE
    if k == "Tdag":
        return T_GATE.conj().T
    if k in ("Rx", "R90x"):
        return rx(a)
    if k in ("Ry", "R90y"):
        return ry(a)
    if k in ("Rz", "R90z"):
        return rz(a)
    raise ValueError(k)


def _projector(qubit: int, value: int) -> np.ndarray:
    p = np.zeros((2, 2), dtype=complex)
    p[value, value] = 1.0
    return embed(p, qubit)


def gate_unitary(gate: Gate) -> np.ndarray:
    """Exact 8x8 unitary of a gate acting on the three-qubit register."""
    if gate.kind in SINGLE_QUBIT_KINDS:
        return embed(_single_matrix(gate), gate.qubits[0])
    if gate.kind == "CNOT":
        c, t = gate.qubits
        return _projector(c, 0) + _projector(c, 1) @ embed(SIGMA_X, t)
    if gate.kind == "CZ":
        a, b = gate.qubits
        return IDENTITY_8 - 2.0 * _projector(a, 1) @ _projector(b, 1)
    if gate.kind == "Toffoli":
        c1, c2, t = gate.qubits
        both = _projector(c1, 1) @ _projector(c2, 1)
        return IDENTITY_8 + both @ (embed(SIGMA_X, t) - IDENTITY_8)
    if gate.kind == "CCZ":
        u = IDENTITY_8.copy()
        u[7, 7] = -1.0
        return u
    raise ValueError(gate.kind)


def phase_invariant_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Max-abs deviation between u and v after aligning global phase."""
    tr = np.trace(u.conj().T @ v)
    phase = tr / abs(tr) if abs(tr) > 1e-14 else 1.0
    return float(np.max(np.abs(v / phase - u)))
