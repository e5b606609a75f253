import type { LabelReply, QueryView, SessionState } from "./types.js";
import { validateQuery } from "./validate.js";

/** Thrown on a 409: the server moved on and the query must be reloaded. */
export class StaleQueryError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "StaleQueryError";
  }
}

async function getJSON<T>(base: string, path: string): Promise<T> {
  const resp = await fetch(`${base}${path}`, { cache: "no-store" });
  if (!resp.ok) throw new Error(`GET ${path} failed: ${resp.status}`);
  return (await resp.json()) as T;
}

export async function fetchState(base: string): Promise<SessionState> {
  return getJSON<SessionState>(base, "/api/state");
}

export async function fetchQuery(base: string): Promise<QueryView> {
  const raw = await getJSON<unknown>(base, "/api/query");
  return validateQuery(raw);
}

export async function fetchCurve(base: string): Promise<string> {
  const resp = await fetch(`${base}/api/curve`, { cache: "no-store" });
  if (!resp.ok) throw new Error(`GET /api/curve failed: ${resp.status}`);
  return resp.text();
}

export async function submitLabel(
  base: string,
  instanceId: string,
  permutation: number[],
): Promise<LabelReply> {
  const resp = await fetch(`${base}/api/label`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ instance_id: instanceId, permutation }),
  });
  if (resp.status === 409) {
    throw new StaleQueryError("query changed on the server; reload it");
  }
  if (!resp.ok) throw new Error(`POST /api/label failed: ${resp.status}`);
  return (await resp.json()) as LabelReply;
}
