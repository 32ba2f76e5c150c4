/** Grid model of the circuit composer: columns of non-overlapping gate
 * placements over three wires, measurement toggles, and lossless
 * (de)serialization to the service's circuit schema. Invalid edits are
 * rejected and leave the state untouched. */

import {
  CircuitJson,
  GateJson,
  GateKind,
  gateArity,
  requiresAngle,
} from "./types.js";

export interface PlacedGate {
  kind: GateKind;
  qubits: number[];
  angle?: number;
}

export interface Column {
  gates: PlacedGate[];
}

function validGate(kind: GateKind, qubits: number[], angle?: number): string | null {
  if (qubits.some((q) => q < 1 || q > 3)) return "qubit index out of range";
  if (new Set(qubits).size !== qubits.length) return "duplicate qubits";
  if (qubits.length !== gateArity(kind)) return `${kind} takes ${gateArity(kind)} qubit(s)`;
  if (requiresAngle(kind) && (angle === undefined || Number.isNaN(angle))) {
    return `${kind} requires an angle`;
  }
  if (!requiresAngle(kind) && !kind.startsWith("R90") && angle !== undefined) {
    return `${kind} takes no angle`;
  }
  return null;
}

export class ComposerState {
  columns: Column[] = [];
  measure: [boolean, boolean, boolean] = [true, true, true];
  mode: "simulate" | "emulate" = "simulate";

  /** Occupied wires of one column. */
  private occupancy(col: number): Set<number> {
    const used = new Set<number>();
    if (col < this.columns.length) {
      for (const g of this.columns[col].gates) {
        for (const q of g.qubits) used.add(q);
      }
    }
    return used;
  }

  /** Place a gate in the given column (extends the grid as needed).
   * Returns an error message and changes nothing when the placement is
   * invalid or overlaps an existing gate. */
  place(col: number, kind: GateKind, qubits: number[], angle?: number): string | null {
    if (col < 0) return "negative column";
    const err = validGate(kind, qubits, angle);
    if (err) return err;
    const used = this.occupancy(col);
    if (qubits.some((q) => used.has(q))) return "cells already occupied";
    while (this.columns.length <= col) this.columns.push({ gates: [] });
    const gate: PlacedGate = { kind, qubits: [...qubits] };
    if (angle !== undefined) gate.angle = angle;
    this.columns[col].gates.push(gate);
    this.columns[col].gates.sort((a, b) => Math.min(...a.qubits) - Math.min(...b.qubits));
    return null;
  }

  /** Append into the first column from the right where the gate fits
   * without crossing anything on its wires (canonical left-packing). */
  append(kind: GateKind, qubits: number[], angle?: number): string | null {
    const err = validGate(kind, qubits, angle);
    if (err) return err;
    let col = this.columns.length;
    while (col > 0) {
      const used = this.occupancy(col - 1);
      if (qubits.some((q) => used.has(q))) break;
      col -= 1;
    }
    return this.place(col, kind, qubits, angle);
  }

  gateAt(col: number, qubit: number): PlacedGate | null {
    if (col >= this.columns.length) return null;
    return this.columns[col].gates.find((g) => g.qubits.includes(qubit)) ?? null;
  }

  remove(col: number, qubit: number): boolean {
    const gate = this.gateAt(col, qubit);
    if (!gate) return false;
    const column = this.columns[col];
    column.gates = column.gates.filter((g) => g !== gate);
    while (this.columns.length && this.columns[this.columns.length - 1].gates.length === 0) {
      this.columns.pop();
    }
    return true;
  }

  move(fromCol: number, qubit: number, toCol: number): string | null {
    const gate = this.gateAt(fromCol, qubit);
    if (!gate) return "nothing to move";
    if (toCol !== fromCol) {
      const used = this.occupancy(toCol);
      if (gate.qubits.some((q) => used.has(q))) return "cells already occupied";
    }
    this.remove(fromCol, qubit);
    return this.place(toCol, gate.kind, gate.qubits, gate.angle);
  }

  setAngle(col: number, qubit: number, angle: number): string | null {
    const gate = this.gateAt(col, qubit);
    if (!gate) return "no gate there";
    if (!requiresAngle(gate.kind)) return `${gate.kind} takes no angle`;
    if (Number.isNaN(angle)) return "not a number";
    gate.angle = angle;
    return null;
  }

  toggleMeasure(qubit: number): void {
    this.measure[qubit - 1] = !this.measure[qubit - 1];
  }

  serialize(): CircuitJson {
    const gates: GateJson[] = [];
    for (const column of this.columns) {
      for (const g of column.gates) {
        const entry: GateJson = { kind: g.kind, qubits: [...g.qubits] };
        if (g.angle !== undefined) entry.angle = g.angle;
        gates.push(entry);
      }
    }
    return { qubits: 3, gates, measure: [...this.measure] };
  }

  static deserialize(circuit: CircuitJson): ComposerState {
    const state = new ComposerState();
    if (circuit.qubits !== 3) throw new Error("this machine has 3 qubits");
    for (const g of circuit.gates) {
      const err = state.append(g.kind, g.qubits, g.angle);
      if (err) throw new Error(`bad gate ${g.kind}: ${err}`);
    }
    state.measure = [
      Boolean(circuit.measure[0]),
      Boolean(circuit.measure[1]),
      Boolean(circuit.measure[2]),
    ];
    return state;
  }

  equals(other: ComposerState): boolean {
    return JSON.stringify(this.serialize()) === JSON.stringify(other.serialize())
      && JSON.stringify(this.columns) === JSON.stringify(other.columns);
  }
}
