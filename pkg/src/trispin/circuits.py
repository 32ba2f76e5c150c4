"""Circuit representation, ideal simulation, built-in demos, and the
three-qubit linear-system solver pipeline.

The solver maps a 2x2 real symmetric system A x = b onto three qubits: one
data qubit, a one-bit eigenvalue register, and the rotation ancilla. With A
diagonalized by a y-rotation and eigenvalues whose binary forms differ in
exactly the estimated bit, phase estimation collapses to a CNOT and the
eigenvalue-conditioned rotation to a CZ/CNOT sandwich on the ancilla.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .gates import Gate, gate_unitary
from .spincore import DensityMatrix

TWO_PI = 2.0 * np.pi


@dataclass
class Circuit:
    gates: tuple[Gate, ...] = ()
    measure: tuple[bool, bool, bool] = (True, True, True)

    def __post_init__(self):
        self.gates = tuple(self.gates)
        self.measure = tuple(bool(m) for m in self.measure)
        if len(self.measure) != 3:
            raise ValueError("measure needs three flags")

    def to_dict(self) -> dict:
        out = {"qubits": 3, "gates": [], "measure": list(self.measure)}
        for g in self.gates:
            entry = {"kind": g.kind, "qubits": list(g.qubits)}
            if g.angle is not None:
                entry["angle"] = g.angle
            out["gates"].append(entry)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        gates = tuple(Gate(g["kind"], tuple(g["qubits"]), g.get("angle"))
                      for g in d.get("gates", []))
        return cls(gates, tuple(d.get("measure", [True, True, True])))

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    u = np.eye(8, dtype=complex)
    for g in circuit.gates:
        u = gate_unitary(g) @ u
    return u


def simulate_ideal(circuit: Circuit) -> np.ndarray:
    """Exact statevector run from |000>: the eight basis probabilities."""
    state = np.zeros(8, dtype=complex)
    state[0] = 1.0
    for g in circuit.gates:
        state = gate_unitary(g) @ state
    return np.abs(state) ** 2


def simulate_state(circuit: Circuit) -> np.ndarray:
    state = np.zeros(8, dtype=complex)
    state[0] = 1.0
    for g in circuit.gates:
        state = gate_unitary(g) @ state
    return state


def simulate_density(circuit: Circuit) -> DensityMatrix:
    return DensityMatrix.pure(simulate_state(circuit))


# ---------------------------------------------------------------------------
# Linear-system solver


class HhlError(Exception):
    pass


def diagonalize_2x2(a: np.ndarray) -> tuple[float, float, float]:
    """Eigenvalues (ascending) and the angle such that R_{-y}(angle)
    diagonalizes A: A = R_{-y}(angle)^dag diag(l1, l2) R_{-y}(angle)."""
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2) or abs(a[0, 1] - a[1, 0]) > 1e-10:
        raise ValueError("A must be real symmetric 2x2")
    evals, evecs = np.linalg.eigh(a)
    v1 = evecs[:, 0]
    if v1[0] < 0:
        v1 = -v1
    angle = 2.0 * np.arctan2(v1[1], v1[0])
    return float(evals[0]), float(evals[1]), float(angle)


def u_d_matrix(angle: float) -> np.ndarray:
    """R_{-y}(angle) = Ry(-angle), the basis change that diagonalizes A."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, s], [-s, c]])


def _check_one_bit_register(l1: float, l2: float, t0: float,
                            tol: float = 1e-4):
    """The one-qubit register can only distinguish eigenvalues whose phases
    under exp(i*A*t0/2) are exactly 0 and pi: the binary expansions must
    differ in the single estimated bit, all more-significant bits known.
    The tolerance admits rounded inputs; a phase error eps leaks only
    O(eps^2) probability."""
    ph1 = (l1 * t0 / 2.0) % TWO_PI
    ph2 = (l2 * t0 / 2.0) % TWO_PI
    ok1 = min(ph1, TWO_PI - ph1) < tol
    ok2 = abs(ph2 - np.pi) < tol
    if not (ok1 and ok2):
        raise HhlError(
            "eigenvalues violate the one-bit difference requirement: with "
            f"t0={t0:.6g} the register phases are {ph1:.4g} and {ph2:.4g}, "
            "need exactly 0 and pi (binary forms differing in the estimated "
            "bit only)")


@dataclass
class HhlProblem:
    a_matrix: np.ndarray
    b_vector: np.ndarray
    c_const: float
    t0: float
    lambda1: float
    lambda2: float
    u_d_angle: float
    theta: float = field(init=False)

    def __post_init__(self):
        self.a_matrix = np.asarray(self.a_matrix, dtype=float)
        self.b_vector = np.asarray(self.b_vector, dtype=float).reshape(2)
        norm = np.linalg.norm(self.b_vector)
        if norm == 0:
            raise ValueError("b must be nonzero")
        self.b_vector = self.b_vector / norm
        if not self.lambda1 < self.lambda2:
            raise ValueError("eigenvalues must be distinct and ascending")
        if not 0 < self.c_const <= self.lambda1 + 1e-12:
            raise ValueError("need 0 < C <= lambda1")
        self.theta = -2.0 * np.arccos(self.lambda1 / self.lambda2)

    @classmethod
    def from_data(cls, a, b, c: float | None = None, t0: float = TWO_PI) -> "HhlProblem":
        l1, l2, angle = diagonalize_2x2(a)
        if l1 <= 0:
            raise HhlError("matrix must be positive definite for this solver")
        _check_one_bit_register(l1, l2, t0)
        if c is None or abs(c - l1) <= 1e-4 * max(1.0, abs(l1)):
            c = l1  # rounded inputs intend the optimal C = lambda1
        return cls(a_matrix=np.asarray(a, dtype=float), b_vector=b,
                   c_const=float(c), t0=t0,
                   lambda1=l1, lambda2=l2, u_d_angle=angle)

    @classmethod
    def demo_instance(cls) -> "HhlProblem":
        a = np.array([[2.14645, -0.35355], [-0.35355, 2.85355]])
        b = np.array([0.70711, 0.70711])
        return cls.from_data(a, b, c=2.0)

    def betas(self) -> np.ndarray:
        """Components of b in the eigenbasis: U_d . b."""
        return u_d_matrix(self.u_d_angle) @ self.b_vector

    def to_dict(self) -> dict:
        return {"a": self.a_matrix.tolist(), "b": self.b_vector.tolist(),
                "c": self.c_const, "t0": self.t0}

    @classmethod
    def from_json(cls, text: str) -> "HhlProblem":
        d = json.loads(text)
        return cls.from_data(np.array(d["a"]), np.array(d["b"]),
                             c=d.get("c"), t0=d.get("t0", TWO_PI))


def hhl_circuit(problem: HhlProblem) -> Circuit:
    """The complete native-gate sequence.

    Time order: flip the ancilla to |1>; prepare b merged with the
    diagonalizing rotation on the data qubit; phase-estimation CNOT; the
    register-conditioned ancilla rotation as CZ - R-x(90) - R-z((pi-th)/2) -
    CNOT - Rz((pi-th)/2) - Rx(90); inverse phase-estimation CNOT; undo the
    diagonalizing rotation.
    """
    prep_angle = 2.0 * np.arctan2(problem.b_vector[1], problem.b_vector[0])
    combined = prep_angle - problem.u_d_angle
    beta0 = -2.0 * np.arccos(min(1.0, problem.c_const / problem.lambda1))
    beta1 = -2.0 * np.arccos(min(1.0, problem.c_const / problem.lambda2))
    theta_block = beta1 - beta0
    half = (np.pi - theta_block) / 2.0

    gates = [
        Gate("Rx", (3,), np.pi),
        Gate("Ry", (1,), combined),
        Gate("CNOT", (1, 2)),
    ]
    if abs(beta0) > 1e-12:
        gates.append(Gate("Ry", (3,), beta0))
    gates += [
        Gate("CZ", (2, 3)),
        Gate("Rx", (3,), -np.pi / 2),
        Gate("Rz", (3,), -half),
        Gate("CNOT", (2, 3)),
        Gate("Rz", (3,), half),
        Gate("Rx", (3,), np.pi / 2),
        Gate("CNOT", (1, 2)),
        Gate("Ry", (1,), problem.u_d_angle),
    ]
    return Circuit(tuple(gates), measure=(True, True, True))


def hhl_reference(problem: HhlProblem) -> tuple[np.ndarray, float]:
    """Classical reference: the normalized solution direction and the
    postselection success probability sum |C beta_i / lambda_i|^2."""
    if abs(np.linalg.det(problem.a_matrix)) < 1e-12:
        raise HhlError("matrix is singular")
    x = np.linalg.solve(problem.a_matrix, problem.b_vector)
    x = x / np.linalg.norm(x)
    betas = problem.betas()
    lams = np.array([problem.lambda1, problem.lambda2])
    success = float(np.sum((problem.c_const * betas / lams) ** 2))
    return x, success


@dataclass
class HhlSolution:
    x_normalized: tuple[float, float]
    success_probability: float
    sign: int
    angle_error_deg: float
    tangent_rel_error: float

    def to_dict(self) -> dict:
        return {"x_normalized": list(self.x_normalized),
                "success_probability": self.success_probability,
                "sign": self.sign,
                "angle_error_deg": self.angle_error_deg,
                "tangent_rel_error": self.tangent_rel_error}


def extract_solution(probabilities, sign: int,
                     problem: HhlProblem | None = None) -> HhlSolution:
    """Solution vector from the measured populations: x is proportional to
    (sqrt(rho_22), sign * sqrt(rho_66)); success probability is the total
    ancilla-|1> mass (rho_22 + rho_44 + rho_66 + rho_88, the middle two being
    a leakage diagnostic, ideally zero)."""
    p = np.asarray(probabilities, dtype=float)
    if p.shape != (8,) or p.min() < -1e-9:
        raise ValueError("need a valid 8-entry distribution")
    p = p / p.sum()
    if p[1] + p[5] <= 0:
        raise HhlError("postselection failed: no population in |001> or |101>")
    x = np.array([np.sqrt(p[1]), sign * np.sqrt(p[5])])
    x = x / np.linalg.norm(x)
    success = float(p[1] + p[3] + p[5] + p[7])
    angle_err = np.nan
    tan_err = np.nan
    if problem is not None:
        x_ref, _ = hhl_reference(problem)
        cosang = np.clip(abs(np.dot(x, x_ref)), 0.0, 1.0)
        angle_err = float(np.degrees(np.arccos(cosang)))
        with np.errstate(divide="ignore", invalid="ignore"):
            tan_ref = x_ref[1] / x_ref[0]
            tan_meas = x[1] / x[0]
            if abs(tan_ref) > 1e-12 and np.isfinite(tan_ref) and np.isfinite(tan_meas):
                tan_err = float(abs(tan_meas - tan_ref) / abs(tan_ref))
            else:
                tan_err = float(abs(np.arctan2(x[1], x[0])
                                    - np.arctan2(x_ref[1], x_ref[0])))
    return HhlSolution(tuple(float(v) for v in x), success, int(sign),
                       angle_err, tan_err)


# ---------------------------------------------------------------------------
# Built-in demo circuits


@dataclass(frozen=True)
class Builtin:
    name: str
    description: str
    circuit: Circuit
    ideal_probabilities: tuple[float, ...]


def builtin_circuits() -> list[Builtin]:
    """A small educational set; each entry records its exact ideal output."""
    defs = []

    bell = Circuit((Gate("H", (1,)), Gate("CNOT", (1, 2))))
    defs.append(("bell", "Bell pair on qubits 1 and 2", bell))

    ghz = Circuit((Gate("H", (1,)), Gate("CNOT", (1, 2)), Gate("CNOT", (2, 3))))
    defs.append(("ghz", "Three-qubit GHZ state", ghz))

    deutsch = Circuit((
        Gate("X", (2,)), Gate("H", (1,)), Gate("H", (2,)),
        Gate("CNOT", (1, 2)), Gate("H", (1,)),
    ), measure=(True, False, False))
    defs.append(("deutsch", "Deutsch's algorithm on two qubits with the "
                            "balanced oracle f(x)=x; qubit 1 reads 1", deutsch))

    grover = Circuit((
        Gate("H", (1,)), Gate("H", (2,)), Gate("H", (3,)),
        Gate("CCZ", (1, 2, 3)),
        Gate("H", (1,)), Gate("H", (2,)), Gate("H", (3,)),
        Gate("X", (1,)), Gate("X", (2,)), Gate("X", (3,)),
        Gate("CCZ", (1, 2, 3)),
        Gate("X", (1,)), Gate("X", (2,)), Gate("X", (3,)),
        Gate("H", (1,)), Gate("H", (2,)), Gate("H", (3,)),
    ))
    defs.append(("grover", "Single Grover iteration marking |111> "
                           "(success probability 25/32)", grover))

    hhl = hhl_circuit(HhlProblem.demo_instance())
    defs.append(("hhl", "Linear-system solver demo instance with eigenvalues "
                        "2 and 3", hhl))

    return [Builtin(name, desc, circ,
                    tuple(float(p) for p in simulate_ideal(circ)))
            for name, desc, circ in defs]
