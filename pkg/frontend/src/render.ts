/** HTML rendering for the explorer page.
 *
 * Every function here is pure string-in, string-out so the whole visible
 * surface can be asserted on in tests without a browser.  `app.ts` mounts
 * these strings into the live document.
 */

import type {
  ProvenanceEvent,
  SliceResult,
  Step,
  StepPage,
  VariableInstance,
} from "./api.js";
import type { Hop } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export interface StepListOptions {
  selected?: number | null;
  highlighted?: number | null;
}

/** The paginated step list; one row per step, reads/writes as chips. */
export function renderStepList(
  page: StepPage,
  options: StepListOptions = {},
): string {
  if (page.steps.length === 0) {
    return renderEmptyState();
  }
  const rows = page.steps.map((step) => renderStepRow(step, options));
  const range = `steps ${page.from}–${Math.min(page.to, page.step_count)}` +
    ` of ${page.step_count}`;
  return `<div class="step-range">${range}</div>\n` +
    `<ol class="step-list">\n${rows.join("\n")}\n</ol>`;
}

function renderStepRow(step: Step, options: StepListOptions): string {
  const classes = ["step"];
  if (step.is_call_site) classes.push("call-site");
  if (step.step_id === options.selected) classes.push("selected");
  if (step.step_id === options.highlighted) classes.push("highlighted");
  const chips = [
    ...step.reads.map((id) => chip("read", id)),
    ...step.writes.map((id) => chip("write", id)),
  ].join("");
  return `<li class="${classes.join(" ")}" data-step-id="${step.step_id}"` +
    ` data-line="${step.line}">` +
    `<span class="step-id">${step.step_id}</span>` +
    `<span class="step-loc">${escapeHtml(step.file)}:${step.line}</span>` +
    `<code class="step-code">${escapeHtml(step.code)}</code>` +
    `<span class="step-vars">${chips}</span>` +
    `</li>`;
}

function chip(kind: "read" | "write", varId: string): string {
  return `<button class="chip ${kind}" data-var-id="${escapeHtml(varId)}">` +
    `${kind === "read" ? "r" : "w"}:${escapeHtml(varId)}</button>`;
}

/** The variable panel shown when a step is selected. */
export function renderVariablePanel(
  step: Step,
  variables: VariableInstance[],
): string {
  const rows = variables.map((v) =>
    `<tr class="var-row" data-var-id="${escapeHtml(v.var_id)}">` +
    `<td class="var-name">${escapeHtml(v.name)}</td>` +
    `<td class="var-type">${escapeHtml(v.type)}</td>` +
    `<td class="var-content"><code>${escapeHtml(v.content)}</code></td>` +
    `</tr>`,
  );
  return `<section class="variable-panel">` +
    `<h2>step ${step.step_id} &mdash; <code>${escapeHtml(step.code)}</code></h2>` +
    `<table><thead><tr><th>name</th><th>type</th><th>value</th></tr></thead>` +
    `<tbody>${rows.join("")}</tbody></table>` +
    `</section>`;
}

/** The provenance trail behind a slice answer, degraded stages badged. */
export function renderProvenance(events: ProvenanceEvent[]): string {
  const rows = events.map((event) => {
    const classes = ["provenance-event", `kind-${event.kind}`];
    const badge = event.kind === "degraded"
      ? `<span class="badge degraded">degraded</span>`
      : "";
    const detail = Object.entries(event)
      .filter(([key]) => key !== "kind")
      .map(([key, value]) => `${key}=${JSON.stringify(value)}`)
      .join(" ");
    return `<li class="${classes.join(" ")}">${badge}` +
      `<span class="event-kind">${escapeHtml(event.kind)}</span> ` +
      `<span class="event-detail">${escapeHtml(detail)}</span></li>`;
  });
  return `<ol class="provenance">${rows.join("")}</ol>`;
}

export function renderBreadcrumb(chain: Hop[]): string {
  if (chain.length === 0) {
    return `<nav class="breadcrumb empty">no jumps yet</nav>`;
  }
  const first = chain[0]!;
  const hops = chain.map((hop) =>
    `<span class="hop" data-def-step="${hop.defStep}">` +
    `<code class="hop-path">${escapeHtml(hop.path)}</code>` +
    ` → step ${hop.defStep}</span>`,
  );
  return `<nav class="breadcrumb">` +
    `<span class="hop-origin">step ${first.step}</span> ` +
    hops.join(" ") +
    `</nav>`;
}

/** The outcome line above the provenance trail. */
export function renderAnswer(result: SliceResult): string {
  if (result.def_step === null) {
    return `<p class="answer none">no definition found for ` +
      `<code>${escapeHtml(result.query.path)}</code> before step ` +
      `${result.query.step}</p>`;
  }
  return `<p class="answer found">defined at step ${result.def_step} ` +
    `<span class="case-kind">(${escapeHtml(result.case_kind)})</span></p>`;
}

export function renderEmptyState(): string {
  return `<p class="empty-state">this trace recorded no steps</p>`;
}

export function renderConnectionBanner(detail: string): string {
  return `<div class="banner connection-error">cannot reach the trace ` +
    `server &mdash; ${escapeHtml(detail)}</div>`;
}

export function renderInlineError(message: string): string {
  return `<p class="inline-error">${escapeHtml(message)}</p>`;
}
