import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ConnectionError, type StepPage } from "../src/api.js";
import {
  renderConnectionBanner,
  renderStepList,
  renderVariablePanel,
} from "../src/render.js";
import {
  loadFixture,
  startFixtureServer,
  type FixtureServer,
} from "./fixture_server.js";

let server: FixtureServer;
let client: ApiClient;

beforeAll(async () => {
  server = await startFixtureServer();
  client = new ApiClient(server.url);
});

afterAll(async () => {
  await server.close();
});

function stepRows(html: string): string[] {
  return html.match(/<li class="step[^"]*"/g) ?? [];
}

describe("trace view", () => {
  it("renders all 13 steps of the aliasing trace", async () => {
    const page = await client.steps();
    const html = renderStepList(page);
    expect(stepRows(html)).toHaveLength(13);
    for (let stepId = 1; stepId <= 13; stepId += 1) {
      expect(html).toContain(`data-step-id="${stepId}"`);
    }
    expect(html).toContain("steps 1–13 of 13");
  });

  it("shows each step's code, reads, and writes as served", async () => {
    const page = await client.steps();
    const raw = loadFixture("steps.json") as StepPage;
    expect(page).toEqual(raw);

    const html = renderStepList(page);
    for (const step of raw.steps) {
      for (const id of step.reads) {
        expect(html).toContain(`class="chip read" data-var-id="${id}"`);
      }
      for (const id of step.writes) {
        expect(html).toContain(`class="chip write" data-var-id="${id}"`);
      }
    }
    expect(html).toContain("var result = sharedList.get(0).toString();");
  });

  it("marks call-site steps", async () => {
    const page = await client.steps();
    const html = renderStepList(page);
    expect(html).toContain(
      '<li class="step call-site" data-step-id="7" data-line="8">');
  });

  it("variable panel for the final step shows the built list", async () => {
    const page = await client.steps();
    const last = page.steps[page.steps.length - 1]!;
    expect(last.step_id).toBe(13);
    const variables = await Promise.all(
      [...last.reads, ...last.writes].map((id) => client.variable(id)));
    const html = renderVariablePanel(last, variables);
    expect(html).toContain('<td class="var-name">sharedList</td>');
    expect(html).toContain("[&quot;002&quot;]");
    expect(html).toContain('<td class="var-name">result</td>');
  });

  it("renders the empty-state message for a trace with no steps", async () => {
    const emptyClient = new ApiClient(`${server.url}/empty`);
    const meta = await emptyClient.traceMeta();
    expect(meta.step_count).toBe(0);
    const page = await emptyClient.steps();
    expect(renderStepList(page)).toContain(
      '<p class="empty-state">this trace recorded no steps</p>');
  });

  it("shows a connection banner when the API is unreachable", async () => {
    const dead = new ApiClient("http://127.0.0.1:1");
    let banner = "";
    try {
      await dead.traceMeta();
    } catch (error) {
      expect(error).toBeInstanceOf(ConnectionError);
      banner = renderConnectionBanner((error as Error).message);
    }
    expect(banner).toContain('class="banner connection-error"');
    expect(banner).toContain("cannot reach the trace server");
  });
});
