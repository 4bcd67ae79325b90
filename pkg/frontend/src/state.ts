/** Session state: which trace is open and the breadcrumb chain of
 * dependency jumps, URL-encoded so a debugging path is shareable and
 * survives a page reload.
 *
 * A hop records one answered query: asked at `step` for `path`, landed
 * on `defStep`.  Chains only ever walk backward through the trace, so
 * hops are strictly decreasing in their landing step; an out-of-order
 * jump starts a fresh chain instead of corrupting the old one.
 */

export interface Hop {
  step: number;
  path: string;
  defStep: number;
}

export interface SessionState {
  traceId: string;
  chain: Hop[];
}

export function emptyState(traceId = ""): SessionState {
  return { traceId, chain: [] };
}

/** Append a jump, keeping the chain strictly decreasing in landing step. */
export function appendHop(state: SessionState, hop: Hop): SessionState {
  const last = state.chain[state.chain.length - 1];
  const continues = last === undefined || hop.defStep < last.defStep;
  return {
    traceId: state.traceId,
    chain: continues ? [...state.chain, hop] : [hop],
  };
}

/** The step the UI should highlight: where the last jump landed. */
export function currentFocus(state: SessionState): number | null {
  const last = state.chain[state.chain.length - 1];
  return last === undefined ? null : last.defStep;
}

export function encodeState(state: SessionState): string {
  const parts: string[] = [];
  if (state.traceId) parts.push(`trace=${encodeURIComponent(state.traceId)}`);
  if (state.chain.length) {
    const hops = state.chain
      .map((h) => `${h.step}:${encodeURIComponent(h.path)}:${h.defStep}`)
      .join(",");
    parts.push(`chain=${hops}`);
  }
  return parts.length ? `#${parts.join("&")}` : "";
}

/** Decode a URL fragment; anything malformed decays to an empty state. */
export function decodeState(fragment: string): SessionState {
  const state = emptyState();
  const body = fragment.startsWith("#") ? fragment.slice(1) : fragment;
  if (!body) return state;
  for (const part of body.split("&")) {
    const eq = part.indexOf("=");
    if (eq < 0) continue;
    const key = part.slice(0, eq);
    const value = part.slice(eq + 1);
    if (key === "trace") {
      state.traceId = safeDecode(value) ?? "";
    } else if (key === "chain") {
      state.chain = decodeChain(value);
    }
  }
  return state;
}

function decodeChain(value: string): Hop[] {
  const chain: Hop[] = [];
  for (const token of value.split(",")) {
    const fields = token.split(":");
    if (fields.length !== 3) return [];
    const step = Number(fields[0]);
    const defStep = Number(fields[2]);
    const path = safeDecode(fields[1] ?? "");
    if (!Number.isInteger(step) || !Number.isInteger(defStep) ||
        path === null || path === "") {
      return [];
    }
    const last = chain[chain.length - 1];
    if (last !== undefined && defStep >= last.defStep) return [];
    chain.push({ step, path, defStep });
  }
  return chain;
}

function safeDecode(text: string): string | null {
  try {
    return decodeURIComponent(text);
  } catch {
    return null;
  }
}
