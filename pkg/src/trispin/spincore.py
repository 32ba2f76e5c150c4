"""Three-spin system definition: molecule parameters, operators, states.

Everything downstream (pulses, GRAPE, readout) works on dense 8x8 complex
matrices built here. Qubit 1 is the most significant bit of the basis label
|q1 q2 q3>, so basis index i = 4*q1 + 2*q2 + q3 runs |000>..|111>.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

# Single-spin Paulis; |0> is the low-energy (m=+1/2) state.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
IDENTITY_8 = np.eye(8, dtype=complex)


def embed(op: np.ndarray, qubit: int) -> np.ndarray:
    """Embed a 2x2 operator on one qubit (1, 2 or 3) into the 8-dim space."""
    if qubit not in (1, 2, 3):
        raise ValueError(f"qubit must be 1, 2 or 3, got {qubit}")
    factors = [IDENTITY_2, IDENTITY_2, IDENTITY_2]
    factors[qubit - 1] = op
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def pauli(axis: str, qubit: int) -> np.ndarray:
    """sigma_axis acting on the given qubit, identity elsewhere."""
    sigma = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}[axis]
    return embed(sigma, qubit)


# Cached full-register operators used all over the readout and GRAPE code.
SX = [pauli("x", k) for k in (1, 2, 3)]
SY = [pauli("y", k) for k in (1, 2, 3)]
SZ = [pauli("z", k) for k in (1, 2, 3)]
IZ = [0.5 * sz for sz in SZ]

#: The seven sigma-z product observables, in readout order:
#: z1, z2, z3, z1z2, z1z3, z2z3, z1z2z3.
ZZ_OBSERVABLES = [
    SZ[0],
    SZ[1],
    SZ[2],
    SZ[0] @ SZ[1],
    SZ[0] @ SZ[2],
    SZ[1] @ SZ[2],
    SZ[0] @ SZ[1] @ SZ[2],
]
ZZ_LABELS = ["z1", "z2", "z3", "z1z2", "z1z3", "z2z3", "z1z2z3"]


@dataclass(frozen=True)
class MoleculeSpec:
    """Physical parameters of the three-spin sample.

    Chemical shifts are rotating-frame offsets in Hz; couplings are ordered
    [J12, J13, J23] in Hz. The default shift values are a stand-in profile
    (distinct, well separated, inside the acquisition window, commensurate so
    selective pulses can wrap spectator precession) -- they are
    configuration, not measured constants. T1/T2 and the J couplings match
    the fluorine three-spin sample this emulator models.
    """

    chemical_shifts_hz: tuple[float, float, float] = (-800.0, -200.0, 600.0)
    j_couplings_hz: tuple[float, float, float] = (-128.0, 68.0, 49.0)
    t1_s: float = 7.0
    t2_s: float = 0.2
    larmor_mhz: float = 40.0

    def __post_init__(self):
        object.__setattr__(self, "chemical_shifts_hz", tuple(float(v) for v in self.chemical_shifts_hz))
        object.__setattr__(self, "j_couplings_hz", tuple(float(v) for v in self.j_couplings_hz))
        if len(self.chemical_shifts_hz) != 3 or len(self.j_couplings_hz) != 3:
            raise ValueError("need exactly three chemical shifts and three J couplings")
        if self.t1_s <= 0 or self.t2_s <= 0:
            raise ValueError("T1 and T2 must be positive")
        if self.t2_s > 2 * self.t1_s + 1e-15:
            raise ValueError("T2 must not exceed 2*T1")
        v1, v2, v3 = self.chemical_shifts_hz
        if len({v1, v2, v3}) != 3:
            raise ValueError("chemical shifts must be pairwise distinct")

    def j_coupling(self, a: int, b: int) -> float:
        """J between qubits a and b (1-based, any order)."""
        pair = tuple(sorted((a, b)))
        return {(1, 2): self.j_couplings_hz[0],
                (1, 3): self.j_couplings_hz[1],
                (2, 3): self.j_couplings_hz[2]}[pair]

    def to_json(self) -> str:
        return json.dumps({
            "chemical_shifts_hz": list(self.chemical_shifts_hz),
            "j_couplings_hz": list(self.j_couplings_hz),
            "t1_s": self.t1_s,
            "t2_s": self.t2_s,
            "larmor_mhz": self.larmor_mhz,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MoleculeSpec":
        d = json.loads(text)
        return cls(
            chemical_shifts_hz=tuple(d["chemical_shifts_hz"]),
            j_couplings_hz=tuple(d["j_couplings_hz"]),
            t1_s=d["t1_s"],
            t2_s=d["t2_s"],
            larmor_mhz=d.get("larmor_mhz", 40.0),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "MoleculeSpec":
        return cls.from_json(Path(path).read_text())


@dataclass
class DensityMatrix:
    """8x8 Hermitian unit-trace state of the three-spin register."""

    matrix: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (8, 8):
            raise ValueError(f"density matrix must be 8x8, got {self.matrix.shape}")
        if self.validate:
            self.check()

    def check(self):
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {np.trace(m).real}, expected 1")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < EIGENVALUE_FLOOR:
            raise ValueError(f"negative eigenvalue {eigs.min()}")

    def renormalized(self) -> "DensityMatrix":
        """Re-Hermitize and rescale the trace; applied after evolution steps
        to bound numerical drift over long pulse sequences."""
        m = 0.5 * (self.matrix + self.matrix.conj().T)
        m = m / np.trace(m).real
        return DensityMatrix(m, validate=False)

    def populations(self) -> np.ndarray:
        return diagonal_probabilities(self)

    @classmethod
    def pure(cls, amplitudes: np.ndarray) -> "DensityMatrix":
        v = np.asarray(amplitudes, dtype=complex).reshape(8)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def basis_state(cls, index: int) -> "DensityMatrix":
        v = np.zeros(8, dtype=complex)
        v[index] = 1.0
        return cls.pure(v)

    @classmethod
    def from_populations(cls, populations) -> "DensityMatrix":
        p = np.asarray(populations, dtype=float)
        if p.shape != (8,) or p.min() < -1e-12:
            raise ValueError("need 8 non-negative populations")
        return cls(np.diag(p / p.sum()).astype(complex))

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(IDENTITY_8 / 8.0)


def build_drift_hamiltonian(spec: MoleculeSpec) -> np.ndarray:
    """Rotating-frame drift generator, rad/s, diagonal in the computational basis.

    H0 = 2*pi*(v1 Iz1 + v2 Iz2 + v3 Iz3)
       + 2*pi*(J12 Iz1 Iz2 + J13 Iz1 Iz3 + J23 Iz2 Iz3)
    """
    v = spec.chemical_shifts_hz
    j12, j13, j23 = spec.j_couplings_hz
    h = sum(v[k] * IZ[k] for k in range(3))
    h = h + j12 * IZ[0] @ IZ[1] + j13 * IZ[0] @ IZ[2] + j23 * IZ[1] @ IZ[2]
    return 2.0 * np.pi * h


def transition_frequencies(spec: MoleculeSpec, qubit: int) -> np.ndarray:
    """The four line positions of one qubit, Hz, ordered by partner states
    (up,up), (up,down), (down,up), (down,down) with 'up' = |0> and partners
    taken in ascending qubit order."""
    partners = [q for q in (1, 2, 3) if q != qubit]
    ja = spec.j_coupling(qubit, partners[0])
    jb = spec.j_coupling(qubit, partners[1])
    vq = spec.chemical_shifts_hz[qubit - 1]
    return np.array([vq + (sa * ja + sb * jb) / 2.0
                     for sa in (+1, -1) for sb in (+1, -1)])


def thermal_state(spec: MoleculeSpec, polarization: float = 1e-5) -> DensityMatrix:
    """High-temperature deviation state: I/8 + (p/8)*(sz1+sz2+sz3)/2.

    The knob scales the deviation from the maximally mixed state; per spin,
    <sigma_z> = p/2. Only the deviation structure matters downstream, the
    absolute scale cancels in readout normalization.
    """
    if not (0.0 < polarization < 0.5):
        raise ValueError(f"polarization must lie in (0, 0.5), got {polarization}")
    dev = (polarization / 8.0) * 0.5 * (SZ[0] + SZ[1] + SZ[2])
    return DensityMatrix(IDENTITY_8 / 8.0 + dev)


def expectation(rho: DensityMatrix, obs: np.ndarray) -> float:
    """Tr(rho . obs) for a Hermitian observable."""
    obs = np.asarray(obs, dtype=complex)
    if np.max(np.abs(obs - obs.conj().T)) > 1e-10:
        raise ValueError("observable must be Hermitian")
    val = np.trace(rho.matrix @ obs)
    return float(val.real)


def diagonal_probabilities(rho: DensityMatrix) -> np.ndarray:
    """The eight populations rho_11..rho_88, ordered |000>..|111>."""
    return np.real(np.diag(rho.matrix)).copy()
