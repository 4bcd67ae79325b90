import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, type SliceResult, type StepPage } from "../src/api.js";
import {
  renderAnswer,
  renderBreadcrumb,
  renderProvenance,
  renderStepList,
} from "../src/render.js";
import { appendHop, currentFocus, emptyState } from "../src/state.js";
import { startFixtureServer, type FixtureServer } from "./fixture_server.js";

const DEEP_PATH = "sharedList.elementData[0].value[1]";

let server: FixtureServer;
let client: ApiClient;
let page: StepPage;

beforeAll(async () => {
  server = await startFixtureServer();
  client = new ApiClient(server.url);
  page = await client.steps();
});

afterAll(async () => {
  await server.close();
});

function hopFrom(result: SliceResult) {
  return {
    step: result.query.step,
    path: result.query.path,
    defStep: result.def_step!,
  };
}

describe("dependency queries", () => {
  it("highlights the line-8 step for the deep aliasing query", async () => {
    const result = await client.slice(13, DEEP_PATH);
    expect(result.def_step).toBe(7);

    const html = renderStepList(page, { highlighted: result.def_step });
    const highlighted = html.match(/<li class="[^"]*highlighted[^"]*"[^>]*>/);
    expect(highlighted).not.toBeNull();
    expect(highlighted![0]).toContain('data-step-id="7"');
    expect(highlighted![0]).toContain('data-line="8"');
    expect(html).toContain("aliasRef.append(&quot;0&quot;);");
  });

  it("appends exactly one breadcrumb hop per answered query", async () => {
    const result = await client.slice(13, DEEP_PATH);
    const before = emptyState("main.mini");
    const after = appendHop(before, hopFrom(result));
    expect(before.chain).toHaveLength(0);
    expect(after.chain).toHaveLength(1);
    expect(currentFocus(after)).toBe(7);

    const html = renderBreadcrumb(after.chain);
    expect(html).toContain('<span class="hop-origin">step 13</span>');
    expect(html).toContain('data-def-step="7"');
  });

  it("repeated queries build a backward causal chain", async () => {
    const first = await client.slice(13, DEEP_PATH);
    const second = await client.slice(7, "aliasRef");
    expect(second.def_step).toBe(5);

    let state = emptyState("main.mini");
    state = appendHop(state, hopFrom(first));
    state = appendHop(state, hopFrom(second));
    expect(state.chain.map((h) => h.defStep)).toEqual([7, 5]);

    const defSteps = state.chain.map((h) => h.defStep);
    expect([...defSteps].sort((a, b) => b - a)).toEqual(defSteps);
  });

  it("renders the provenance trail with estimator calls", async () => {
    const result = await client.slice(13, DEEP_PATH);
    const html = renderProvenance(result.provenance);
    expect(html).toContain("kind-recovery");
    expect(html).toContain("kind-alias_check");
    expect(html).toContain("kind-def_check");
    expect(html).not.toContain("badge degraded");
  });

  it("shows the no-definition notice without navigating", async () => {
    const result = await client.slice(1, "sharedList");
    expect(result.def_step).toBeNull();
    expect(result.case_kind).toBe("none");

    const html = renderAnswer(result);
    expect(html).toContain("no definition found");

    // No hop is appended for an unanswered query: nothing to navigate to.
    const state = emptyState("main.mini");
    expect(currentFocus(state)).toBeNull();
  });

  it("badges degraded answers from a failing estimator", async () => {
    const result = await client.slice(13, DEEP_PATH, "llm");
    expect(result.def_step).toBeNull();
    const degraded = result.provenance.filter((e) => e.kind === "degraded");
    expect(degraded.length).toBeGreaterThan(0);

    const html = renderProvenance(result.provenance);
    expect(html).toContain('<span class="badge degraded">degraded</span>');
    expect(renderAnswer(result)).toContain("no definition found");
  });

  it("answers are shown verbatim from the server", async () => {
    // The UI never computes dependencies; what it renders is exactly what
    // POST /api/slice said.
    const result = await client.slice(13, DEEP_PATH);
    const html = renderAnswer(result);
    expect(html).toContain(`defined at step ${result.def_step}`);
    expect(html).toContain(result.case_kind);
  });
});
