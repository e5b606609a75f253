import type { QueryView } from "./types.js";

/** True iff the array is a bijection on 0..n-1. */
export function isPermutation(values: number[], n: number): boolean {
  if (values.length !== n) return false;
  const seen = new Array<boolean>(n).fill(false);
  for (const v of values) {
    if (!Number.isInteger(v) || v < 0 || v >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

/**
 * Check a query payload before rendering; a malformed one (in particular a
 * non-bijective suggestion) is rejected client-side and never enters the
 * editor.
 */
export function validateQuery(raw: unknown): QueryView {
  const q = raw as Partial<QueryView>;
  if (typeof q !== "object" || q === null) throw new Error("query is not an object");
  if (typeof q.instance_id !== "string") throw new Error("missing instance_id");
  if (typeof q.n !== "number" || q.n < 1) throw new Error("bad node count");
  if (!Array.isArray(q.suggested) || !isPermutation(q.suggested, q.n)) {
    throw new Error("suggested matching is not a permutation");
  }
  if (!Array.isArray(q.confidence) || q.confidence.length !== q.n) {
    throw new Error("confidence matrix has wrong shape");
  }
  for (const row of q.confidence) {
    if (!Array.isArray(row) || row.length !== q.n) {
      throw new Error("confidence matrix has wrong shape");
    }
  }
  if (!Array.isArray(q.value_scores) || q.value_scores.length !== q.n) {
    throw new Error("value scores have wrong length");
  }
  if (!Array.isArray(q.boxes_t) || !Array.isArray(q.boxes_t1)) {
    throw new Error("box lists missing");
  }
  return q as QueryView;
}
