/** Wire schema of the emulator's job service. */

export type GateKind =
  | "X" | "Y" | "Z" | "H" | "T" | "Tdag"
  | "Rx" | "Ry" | "Rz" | "R90x" | "R90y" | "R90z"
  | "CNOT" | "CZ" | "Toffoli" | "CCZ";

export const SINGLE_QUBIT_KINDS: GateKind[] = [
  "X", "Y", "Z", "H", "T", "Tdag", "Rx", "Ry", "Rz", "R90x", "R90y", "R90z",
];
export const TWO_QUBIT_KINDS: GateKind[] = ["CNOT", "CZ"];
export const THREE_QUBIT_KINDS: GateKind[] = ["Toffoli", "CCZ"];
export const ANGLE_KINDS: GateKind[] = ["Rx", "Ry", "Rz"];

export interface GateJson {
  kind: GateKind;
  qubits: number[];
  angle?: number;
}

export interface CircuitJson {
  qubits: number;
  gates: GateJson[];
  measure: boolean[];
}

export interface JobResult {
  probabilities: number[];
  labels: string[];
  full_probabilities: number[];
  metadata: Record<string, unknown>;
}

export interface JobRecord {
  id: string;
  status: "queued" | "running" | "done" | "failed";
  mode: "simulate" | "emulate";
  result: JobResult | null;
  error: string | null;
}

export interface BuiltinEntry {
  name: string;
  description: string;
  circuit: CircuitJson;
  ideal_probabilities: number[];
}

export interface SpectrumEntry {
  qubit: number;
  frequencies_hz: number[];
  real: number[];
  imag: number[];
}

export function gateArity(kind: GateKind): number {
  if (SINGLE_QUBIT_KINDS.includes(kind)) return 1;
  if (TWO_QUBIT_KINDS.includes(kind)) return 2;
  return 3;
}

export function requiresAngle(kind: GateKind): boolean {
  return ANGLE_KINDS.includes(kind);
}
