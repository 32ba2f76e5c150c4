import { beforeEach, describe, expect, it, vi } from "vitest";

import { ComposerApp } from "../src/app.js";
import { BuiltinEntry, CircuitJson } from "../src/types.js";

const HHL_CIRCUIT: CircuitJson = {
  qubits: 3,
  measure: [true, true, true],
  gates: [
    { kind: "Rx", qubits: [3], angle: Math.PI },
    { kind: "Ry", qubits: [1], angle: Math.PI / 4 },
    { kind: "CNOT", qubits: [1, 2] },
    { kind: "CZ", qubits: [2, 3] },
    { kind: "Rx", qubits: [3], angle: -Math.PI / 2 },
    { kind: "Rz", qubits: [3], angle: -2.4118 },
    { kind: "CNOT", qubits: [2, 3] },
    { kind: "Rz", qubits: [3], angle: 2.4118 },
    { kind: "Rx", qubits: [3], angle: Math.PI / 2 },
    { kind: "CNOT", qubits: [1, 2] },
    { kind: "Ry", qubits: [1], angle: Math.PI / 4 },
  ],
};

const HHL_BUILTIN: BuiltinEntry = {
  name: "hhl",
  description: "linear-system demo",
  circuit: HHL_CIRCUIT,
  ideal_probabilities: [0.011914, 0.571415, 0, 0, 0.069443, 0.347227, 0, 0],
};

const HHL_RESULT = {
  id: "job1",
  status: "done",
  mode: "simulate",
  error: null,
  result: {
    probabilities: HHL_BUILTIN.ideal_probabilities,
    labels: ["000", "001", "010", "011", "100", "101", "110", "111"],
    full_probabilities: HHL_BUILTIN.ideal_probabilities,
    metadata: { mode: "simulate" },
  },
};

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("composer app flow", () => {
  let app: ComposerApp;
  let root: HTMLElement;

  beforeEach(async () => {
    root = document.createElement("div");
    document.body.replaceChildren(root);
    vi.restoreAllMocks();
    vi.stubGlobal("fetch", vi.fn(async (input: RequestInfo | URL) => {
      const url = String(input);
      if (url.endsWith("/api/builtins")) return jsonResponse([HHL_BUILTIN]);
      if (url.endsWith("/api/jobs")) return jsonResponse({ id: "job1" }, 202);
      if (url.endsWith("/api/jobs/job1")) return jsonResponse(HHL_RESULT);
      if (url.includes("/api/spectra/")) return jsonResponse([], 404);
      return jsonResponse({ detail: "not found" }, 404);
    }));
    app = new ComposerApp(root, 1);
    await app.init();
  });

  it("loads the solver built-in onto the grid faithfully", async () => {
    const select = root.querySelector("#builtins") as HTMLSelectElement;
    expect(select.options.length).toBe(2);
    select.value = "hhl";
    select.dispatchEvent(new Event("change"));
    const loaded = app.state.serialize().gates;
    expect(loaded).toHaveLength(11);
    // packing may slide gates past disjoint wires (they commute); the
    // per-wire gate order must survive exactly
    for (const q of [1, 2, 3]) {
      const wire = (gs: typeof loaded) => gs
        .filter((g) => g.qubits.includes(q))
        .map((g) => `${g.kind}${g.qubits.join("")}@${g.angle?.toFixed(4) ?? ""}`);
      expect(wire(loaded)).toEqual(wire(HHL_CIRCUIT.gates));
    }
    // and the grid is stable: reloading the serialized form changes nothing
    const again = (await import("../src/composer.js")).ComposerState
      .deserialize(app.state.serialize());
    expect(again.equals(app.state)).toBe(true);
    // eleven gates drawn on the wires
    const drawn = root.querySelectorAll("#grid td.cell.single, #grid td.cell.multi");
    expect(drawn.length).toBeGreaterThanOrEqual(11);
  });

  it("runs the built-in and displays a consistent solution report", async () => {
    const select = root.querySelector("#builtins") as HTMLSelectElement;
    select.value = "hhl";
    select.dispatchEvent(new Event("change"));
    const job = await app.execute("simulate");
    expect(job?.status).toBe("done");
    const bars = root.querySelectorAll<HTMLElement>("#results .bar");
    expect(bars).toHaveLength(8);
    expect(parseFloat(bars[1].dataset.prob!)).toBeCloseTo(0.571415, 5);
    const x1 = parseFloat(
      (root.querySelector(".solution-x1") as HTMLElement).dataset.value!);
    const x2 = parseFloat(
      (root.querySelector(".solution-x2") as HTMLElement).dataset.value!);
    expect(x1).toBeCloseTo(0.78869, 4);
    expect(x2).toBeCloseTo(0.61481, 4);
  });

  it("shows a dismissible error banner on API failure", async () => {
    vi.stubGlobal("fetch", vi.fn(async () =>
      jsonResponse({ detail: "unknown gate kind 'FROB'" }, 400)));
    await app.execute("simulate");
    const banner = root.querySelector(".error-banner");
    expect(banner).not.toBeNull();
    expect(banner!.textContent).toMatch(/FROB/);
    (banner!.querySelector(".error-dismiss") as HTMLButtonElement).click();
    expect(root.querySelector(".error-banner")).toBeNull();
  });

  it("places gates from cell clicks and toggles measurement labels", () => {
    app.selectedKind = "H";
    app.cellClicked(0, 1);
    expect(app.state.gateAt(0, 1)?.kind).toBe("H");
    const toggle = root.querySelector('td.measure-toggle[data-qubit="3"]') as HTMLElement;
    toggle.click();
    expect(app.state.measure).toEqual([true, true, false]);
  });
});
