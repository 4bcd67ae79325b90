/** Browser bootstrap: wires the API client, session state, and renderers
 * into the live page.  All rendering and state transitions live in
 * `render.ts` / `state.ts`; this file only moves DOM and network.
 */

import {
  ApiClient,
  ApiError,
  ConnectionError,
  SingleFlight,
  type SliceResult,
  type StepPage,
} from "./api.js";
import {
  renderAnswer,
  renderBreadcrumb,
  renderConnectionBanner,
  renderInlineError,
  renderProvenance,
  renderStepList,
  renderVariablePanel,
} from "./render.js";
import {
  appendHop,
  currentFocus,
  decodeState,
  encodeState,
  type SessionState,
} from "./state.js";

const DEFAULT_API = "http://127.0.0.1:8571";

interface Mount {
  banner: HTMLElement;
  steps: HTMLElement;
  panel: HTMLElement;
  answer: HTMLElement;
  provenance: HTMLElement;
  breadcrumb: HTMLElement;
  form: HTMLFormElement;
}

export async function boot(root: Document = document): Promise<void> {
  const apiBase =
    new URLSearchParams(root.location.search).get("api") ?? DEFAULT_API;
  const client = new ApiClient(apiBase);
  const mount: Mount = {
    banner: byId(root, "banner"),
    steps: byId(root, "steps"),
    panel: byId(root, "panel"),
    answer: byId(root, "answer"),
    provenance: byId(root, "provenance"),
    breadcrumb: byId(root, "breadcrumb"),
    form: byId(root, "query-form") as HTMLFormElement,
  };

  let state: SessionState = decodeState(root.location.hash);
  let page: StepPage | null = null;
  let selected: number | null = null;
  const gate = new SingleFlight();

  function redraw(): void {
    if (page === null) return;
    mount.steps.innerHTML = renderStepList(page, {
      selected,
      highlighted: currentFocus(state),
    });
    mount.breadcrumb.innerHTML = renderBreadcrumb(state.chain);
    const focus = currentFocus(state);
    if (focus !== null) {
      mount.steps
        .querySelector(`[data-step-id="${focus}"]`)
        ?.scrollIntoView({ block: "center" });
    }
  }

  async function selectStep(stepId: number): Promise<void> {
    if (page === null) return;
    const step = page.steps.find((s) => s.step_id === stepId);
    if (step === undefined) return;
    selected = stepId;
    const stepInput = mount.form.elements.namedItem("step") as HTMLInputElement;
    stepInput.value = String(stepId);
    try {
      const vars = await Promise.all(
        [...step.reads, ...step.writes].map((id) => client.variable(id)),
      );
      mount.panel.innerHTML = renderVariablePanel(step, vars);
    } catch (error) {
      mount.panel.innerHTML = renderInlineError(String(error));
    }
    redraw();
  }

  async function runQuery(stepId: number, path: string): Promise<void> {
    const result = await gate.run<SliceResult>(() => client.slice(stepId, path));
    if (result === undefined) return; // a query is already in flight
    mount.answer.innerHTML = renderAnswer(result);
    mount.provenance.innerHTML = renderProvenance(result.provenance);
    if (result.def_step !== null) {
      state = appendHop(state, {
        step: result.query.step,
        path: result.query.path,
        defStep: result.def_step,
      });
      root.defaultView?.history.replaceState(null, "", encodeState(state) || "#");
    }
    redraw();
  }

  mount.form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(mount.form);
    const stepId = Number(data.get("step"));
    const path = String(data.get("path") ?? "").trim();
    if (!Number.isInteger(stepId) || path === "") {
      mount.answer.innerHTML = renderInlineError(
        "enter a step number and an access path",
      );
      return;
    }
    void runQuery(stepId, path).catch((error) => showError(error, mount));
  });

  mount.steps.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const row = target.closest<HTMLElement>("[data-step-id]");
    if (row?.dataset.stepId) {
      void selectStep(Number(row.dataset.stepId));
    }
  });

  try {
    const meta = await client.traceMeta();
    page = await client.steps(1, meta.step_count);
    state = { ...state, traceId: state.traceId || meta.files.join("+") };
    redraw();
  } catch (error) {
    showError(error, mount);
  }
}

function showError(error: unknown, mount: Mount): void {
  if (error instanceof ConnectionError) {
    mount.banner.innerHTML = renderConnectionBanner(error.message);
  } else if (error instanceof ApiError) {
    mount.answer.innerHTML = renderInlineError(
      `${error.code}: ${error.message}`,
    );
  } else {
    mount.answer.innerHTML = renderInlineError(String(error));
  }
}

function byId(root: Document, id: string): HTMLElement {
  const el = root.getElementById(id);
  if (el === null) throw new Error(`missing #${id} in the page shell`);
  return el;
}

if (typeof document !== "undefined" && document.getElementById("steps")) {
  void boot();
}
