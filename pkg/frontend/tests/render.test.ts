import { describe, expect, it } from "vitest";

import { BASIS_LABELS, renderBars, renderSolutionReport } from "../src/render.js";
import { JobResult } from "../src/types.js";

describe("probability bars", () => {
  it("renders two 0.5 bars for the GHZ distribution", () => {
    const container = document.createElement("div");
    const probs = [0.5, 0, 0, 0, 0, 0, 0, 0.5];
    renderBars(container, BASIS_LABELS, probs);
    const bars = [...container.querySelectorAll<HTMLElement>(".bar")];
    expect(bars).toHaveLength(8);
    expect(parseFloat(bars[0].style.height)).toBeCloseTo(50.0, 6);
    expect(parseFloat(bars[7].style.height)).toBeCloseTo(50.0, 6);
    for (const i of [1, 2, 3, 4, 5, 6]) {
      expect(parseFloat(bars[i].style.height)).toBeCloseTo(0.0, 6);
    }
    const labels = [...container.querySelectorAll(".bar-label")].map(
      (n) => n.textContent);
    expect(labels).toEqual(BASIS_LABELS.map((b) => `|${b}>`));
  });

  it("bar heights track the provided probabilities and sum to one", () => {
    const container = document.createElement("div");
    const probs = [0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.05, 0.25];
    renderBars(container, BASIS_LABELS, probs);
    const values = [...container.querySelectorAll<HTMLElement>(".bar")].map(
      (b) => parseFloat(b.dataset.prob ?? "0"));
    const total = values.reduce((a, b) => a + b, 0);
    expect(total).toBeCloseTo(1.0, 6);
    values.forEach((v, i) => expect(v).toBeCloseTo(probs[i], 6));
  });

  it("renders a comparison series side by side", () => {
    const container = document.createElement("div");
    renderBars(container, BASIS_LABELS, [1, 0, 0, 0, 0, 0, 0, 0],
               [0.9, 0.1, 0, 0, 0, 0, 0, 0]);
    expect(container.querySelectorAll(".bar.compare")).toHaveLength(8);
  });
});

describe("solver report", () => {
  it("derives the solution direction from the measured populations", () => {
    // ideal-run populations of the demo instance
    const result: JobResult = {
      probabilities: [0.011914, 0.571415, 0, 0, 0.069443, 0.347227, 0, 0],
      labels: BASIS_LABELS,
      full_probabilities: [0.011914, 0.571415, 0, 0, 0.069443, 0.347227, 0, 0],
      metadata: {},
    };
    const container = document.createElement("div");
    renderSolutionReport(container, result);
    const x1 = parseFloat(
      (container.querySelector(".solution-x1") as HTMLElement).dataset.value!);
    const x2 = parseFloat(
      (container.querySelector(".solution-x2") as HTMLElement).dataset.value!);
    const success = parseFloat(
      (container.querySelector(".solution-success") as HTMLElement).dataset.value!);
    expect(x1).toBeCloseTo(0.78869, 4);
    expect(x2).toBeCloseTo(0.61481, 4);
    expect(success).toBeCloseTo(0.91864, 4);
  });

  it("reports postselection failure when the solver mass is zero", () => {
    const result: JobResult = {
      probabilities: [1, 0, 0, 0, 0, 0, 0, 0],
      labels: BASIS_LABELS,
      full_probabilities: [1, 0, 0, 0, 0, 0, 0, 0],
      metadata: {},
    };
    const container = document.createElement("div");
    renderSolutionReport(container, result);
    expect(container.textContent).toMatch(/postselection failed/);
  });
});
