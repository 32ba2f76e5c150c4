/** Thin client for the job service; all state lives server-side. */

import { BuiltinEntry, CircuitJson, JobRecord, SpectrumEntry } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      /* keep statusText */
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export function submitJob(circuit: CircuitJson, mode: string): Promise<{ id: string }> {
  return request("/api/jobs", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ circuit, mode }),
  });
}

export function getJob(id: string): Promise<JobRecord> {
  return request(`/api/jobs/${id}`);
}

export function getBuiltins(): Promise<BuiltinEntry[]> {
  return request("/api/builtins");
}

export function getSystem(): Promise<Record<string, unknown>> {
  return request("/api/system");
}

export function getSpectra(id: string): Promise<SpectrumEntry[]> {
  return request(`/api/spectra/${id}`);
}

/** Resolve once the job reaches a terminal state, polling at the given
 * cadence (default 500 ms). */
export async function pollJob(id: string, intervalMs = 500,
                              timeoutMs = 600_000): Promise<JobRecord> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const job = await getJob(id);
    if (job.status === "done" || job.status === "failed") return job;
    if (Date.now() > deadline) throw new ApiError(408, "job polling timed out");
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
}
