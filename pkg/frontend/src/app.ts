/** Composer page wiring: gate palette, grid, measurement toggles, run and
 * simulate buttons, built-in drop-down, and the result views. */

import { getBuiltins, getSpectra, pollJob, submitJob } from "./api.js";
import { ComposerState } from "./composer.js";
import {
  BASIS_LABELS,
  renderBars,
  renderErrorBanner,
  renderSolutionReport,
  renderSpectra,
} from "./render.js";
import {
  BuiltinEntry,
  GateKind,
  JobRecord,
  gateArity,
  requiresAngle,
} from "./types.js";

const PALETTE: GateKind[] = [
  "X", "Y", "Z", "H", "T", "Tdag", "R90x", "R90y", "R90z",
  "Rx", "Ry", "Rz", "CNOT", "CZ", "Toffoli", "CCZ",
];

const GRID_COLUMNS = 14;

export class ComposerApp {
  state = new ComposerState();
  selectedKind: GateKind = "H";
  pendingQubits: number[] = [];
  lastResults: { simulate?: JobRecord; emulate?: JobRecord } = {};
  loadedBuiltin: string | null = null;

  constructor(private root: HTMLElement,
              private pollInterval = 500) {}

  async init(): Promise<void> {
    this.root.replaceChildren();
    this.root.appendChild(this.buildToolbar());
    this.root.appendChild(this.buildPalette());
    const grid = document.createElement("div");
    grid.id = "grid";
    this.root.appendChild(grid);
    const results = document.createElement("div");
    results.id = "results";
    this.root.appendChild(results);
    const spectra = document.createElement("div");
    spectra.id = "spectra";
    this.root.appendChild(spectra);
    const report = document.createElement("div");
    report.id = "solution";
    this.root.appendChild(report);
    this.redrawGrid();
    try {
      await this.populateBuiltins();
    } catch {
      /* service may be offline in static preview */
    }
  }

  private buildToolbar(): HTMLElement {
    const bar = document.createElement("div");
    bar.id = "toolbar";
    const select = document.createElement("select");
    select.id = "builtins";
    select.appendChild(new Option("built-in algorithms...", ""));
    bar.appendChild(select);

    const run = document.createElement("button");
    run.id = "run";
    run.textContent = "Run";
    run.addEventListener("click", () => void this.execute("emulate"));
    const sim = document.createElement("button");
    sim.id = "simulate";
    sim.textContent = "Simulate";
    sim.addEventListener("click", () => void this.execute("simulate"));
    bar.append(run, sim);
    return bar;
  }

  private buildPalette(): HTMLElement {
    const palette = document.createElement("div");
    palette.id = "palette";
    for (const kind of PALETTE) {
      const b = document.createElement("button");
      b.className = "palette-gate";
      b.dataset.kind = kind;
      b.textContent = kind;
      b.addEventListener("click", () => {
        this.selectedKind = kind;
        this.pendingQubits = [];
        palette.querySelectorAll(".palette-gate").forEach(
          (x) => x.classList.toggle("selected", x === b));
      });
      palette.appendChild(b);
    }
    return palette;
  }

  async populateBuiltins(): Promise<void> {
    const select = this.root.querySelector("#builtins") as HTMLSelectElement;
    const builtins = await getBuiltins();
    for (const b of builtins) {
      select.appendChild(new Option(`${b.name} - ${b.description}`, b.name));
    }
    select.addEventListener("change", () => {
      const chosen = builtins.find((b) => b.name === select.value);
      if (chosen) this.loadBuiltin(chosen);
    });
  }

  loadBuiltin(builtin: BuiltinEntry): void {
    this.state = ComposerState.deserialize(builtin.circuit);
    this.loadedBuiltin = builtin.name;
    this.redrawGrid();
  }

  /** Cell click: collect qubits until the selected gate's arity is met,
   * then place; invalid placements surface inline and change nothing. */
  cellClicked(col: number, qubit: number): void {
    const existing = this.state.gateAt(col, qubit);
    if (existing) {
      this.state.remove(col, qubit);
      this.redrawGrid();
      return;
    }
    this.pendingQubits.push(qubit);
    if (this.pendingQubits.length < gateArity(this.selectedKind)) return;
    let angle: number | undefined;
    if (requiresAngle(this.selectedKind)) {
      const raw = window.prompt(`${this.selectedKind} angle (radians)`, "1.5708");
      angle = raw === null ? NaN : parseFloat(raw);
    }
    const err = this.state.place(col, this.selectedKind, [...this.pendingQubits], angle);
    this.pendingQubits = [];
    if (err) {
      this.showError(err);
      return;
    }
    this.loadedBuiltin = null;
    this.redrawGrid();
  }

  redrawGrid(): void {
    const grid = this.root.querySelector("#grid");
    if (!grid) return;
    grid.replaceChildren();
    const table = document.createElement("table");
    table.className = "wires";
    const columns = Math.max(GRID_COLUMNS, this.state.columns.length + 2);
    for (let q = 1; q <= 3; q++) {
      const row = document.createElement("tr");
      row.appendChild(Object.assign(document.createElement("th"),
                                    { textContent: `q${q}` }));
      for (let c = 0; c < columns; c++) {
        const cell = document.createElement("td");
        cell.dataset.col = String(c);
        cell.dataset.qubit = String(q);
        const gate = this.state.gateAt(c, q);
        if (gate) {
          cell.textContent = gate.kind + (gate.angle !== undefined
            ? `(${gate.angle.toFixed(2)})` : "");
          cell.className = gate.qubits.length > 1 ? "cell multi" : "cell single";
        } else {
          cell.className = "cell empty";
        }
        cell.addEventListener("click", () => this.cellClicked(c, q));
        row.appendChild(cell);
      }
      const toggle = document.createElement("td");
      toggle.className = "measure-toggle";
      toggle.dataset.qubit = String(q);
      toggle.textContent = this.state.measure[q - 1] ? "M:on" : "M:off";
      toggle.classList.toggle("off", !this.state.measure[q - 1]);
      toggle.addEventListener("click", () => {
        this.state.toggleMeasure(q);
        this.redrawGrid();
      });
      row.appendChild(toggle);
      table.appendChild(row);
    }
    grid.appendChild(table);
  }

  showError(message: string): void {
    renderErrorBanner(this.root, message);
  }

  async execute(mode: "simulate" | "emulate"): Promise<JobRecord | null> {
    const circuit = this.state.serialize();
    try {
      const { id } = await submitJob(circuit, mode);
      const job = await pollJob(id, this.pollInterval);
      if (job.status === "failed") {
        this.showError(job.error ?? "job failed");
        return job;
      }
      this.lastResults[mode] = job;
      this.renderResults();
      if (mode === "emulate") {
        try {
          const spectra = await getSpectra(id);
          renderSpectra(this.root.querySelector("#spectra") as HTMLElement, spectra);
        } catch {
          /* spectra are optional */
        }
      }
      return job;
    } catch (err) {
      this.showError(err instanceof Error ? err.message : String(err));
      return null;
    }
  }

  renderResults(): void {
    const container = this.root.querySelector("#results") as HTMLElement;
    const sim = this.lastResults.simulate?.result ?? null;
    const emu = this.lastResults.emulate?.result ?? null;
    const primary = emu ?? sim;
    if (!primary) return;
    const labels = primary.labels.length === 8 ? BASIS_LABELS : primary.labels;
    renderBars(container, labels,
               (emu ?? sim)!.probabilities,
               emu && sim ? sim.probabilities : null);
    if (this.loadedBuiltin === "hhl") {
      renderSolutionReport(this.root.querySelector("#solution") as HTMLElement,
                           primary);
    }
  }
}

export function mount(selector = "#app"): ComposerApp {
  const root = document.querySelector(selector) as HTMLElement;
  const app = new ComposerApp(root);
  void app.init();
  return app;
}
