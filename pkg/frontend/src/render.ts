/** Result views: probability bars, spectra, and the solver report card.
 * Pure DOM construction so the pieces are testable without a server. */

import { JobResult, SpectrumEntry } from "./types.js";

export const BASIS_LABELS = ["000", "001", "010", "011", "100", "101", "110", "111"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Bar chart of basis-state probabilities; a second series renders
 * side-by-side for experiment/simulation comparison. */
export function renderBars(container: HTMLElement, labels: string[],
                           probabilities: number[],
                           compare?: number[] | null): void {
  container.replaceChildren();
  const chart = el("div", "bar-chart");
  labels.forEach((label, i) => {
    const group = el("div", "bar-group");
    const slot = el("div", "bar-slot");
    const bar = el("div", "bar");
    const p = probabilities[i] ?? 0;
    bar.style.height = `${(p * 100).toFixed(2)}%`;
    bar.dataset.prob = p.toFixed(6);
    bar.title = `${(p * 100).toFixed(2)}%`;
    slot.appendChild(bar);
    if (compare) {
      const q = compare[i] ?? 0;
      const ref = el("div", "bar compare");
      ref.style.height = `${(q * 100).toFixed(2)}%`;
      ref.dataset.prob = q.toFixed(6);
      slot.appendChild(ref);
    }
    group.appendChild(slot);
    group.appendChild(el("div", "bar-label", `|${label}>`));
    chart.appendChild(group);
  });
  container.appendChild(chart);
}

/** Real-part line plot of the three readout spectra (simple SVG). */
export function renderSpectra(container: HTMLElement, spectra: SpectrumEntry[]): void {
  container.replaceChildren();
  for (const entry of spectra) {
    const panel = el("div", "spectrum-panel");
    panel.appendChild(el("div", "spectrum-title", `qubit ${entry.qubit}`));
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("viewBox", "0 0 600 120");
    svg.setAttribute("class", "spectrum-plot");
    const xs = entry.frequencies_hz;
    const ys = entry.real;
    const ymax = Math.max(...ys.map(Math.abs), 1e-30);
    const points = xs.map((x, i) => {
      const px = ((x - xs[0]) / (xs[xs.length - 1] - xs[0])) * 600;
      const py = 110 - (ys[i] / ymax) * 100;
      return `${px.toFixed(1)},${py.toFixed(1)}`;
    });
    const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
    line.setAttribute("points", points.join(" "));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "currentColor");
    svg.appendChild(line);
    panel.appendChild(svg);
    container.appendChild(panel);
  }
}

/** Linear-solver report: the solution direction read from the |001> and
 * |101> populations (square roots, renormalized) plus the postselection
 * mass. Presentation arithmetic only; physics happens server-side. */
export function renderSolutionReport(container: HTMLElement, result: JobResult): void {
  container.replaceChildren();
  const p = result.full_probabilities;
  const mass = p[1] + p[5];
  if (!(mass > 0)) {
    container.appendChild(el("div", "solution-report error", "postselection failed"));
    return;
  }
  const x1 = Math.sqrt(p[1] / mass);
  const x2 = Math.sqrt(p[5] / mass);
  const success = p[1] + p[3] + p[5] + p[7];
  const card = el("div", "solution-report");
  card.appendChild(el("div", "solution-title", "solution"));
  const x1row = el("div", "solution-x1", `x1 = ${x1.toFixed(5)}`);
  x1row.dataset.value = x1.toFixed(6);
  const x2row = el("div", "solution-x2", `|x2| = ${x2.toFixed(5)}`);
  x2row.dataset.value = x2.toFixed(6);
  const srow = el("div", "solution-success",
                  `success probability = ${success.toFixed(5)}`);
  srow.dataset.value = success.toFixed(6);
  card.append(x1row, x2row, srow);
  container.appendChild(card);
}

/** Dismissible error banner with the server's message. */
export function renderErrorBanner(container: HTMLElement, message: string): void {
  const banner = el("div", "error-banner");
  banner.appendChild(el("span", "error-text", message));
  const close = el("button", "error-dismiss", "dismiss");
  close.addEventListener("click", () => banner.remove());
  banner.appendChild(close);
  container.appendChild(banner);
}
