/** A local HTTP server replaying the recorded API responses in
 * tests/fixtures/.  Requests are matched on method, path, and (for POSTs)
 * the exact JSON body; anything unrecorded gets a loud 404 so a drifting
 * test fails instead of silently passing against stale data.
 */

import { readFileSync } from "node:fs";
import { createServer, type Server } from "node:http";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

interface Route {
  method: string;
  path: string;
  body: unknown;
  status: number;
  file: string;
}

export function loadFixture(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8"));
}

function stableStringify(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(stableStringify).join(",")}]`;
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => `${JSON.stringify(k)}:${stableStringify(v)}`);
    return `{${entries.join(",")}}`;
  }
  return JSON.stringify(value);
}

export interface FixtureServer {
  url: string;
  close: () => Promise<void>;
}

export async function startFixtureServer(): Promise<FixtureServer> {
  const routes = loadFixture("routes.json") as Route[];
  const responses = new Map<string, { status: number; body: string }>();
  for (const route of routes) {
    const key = `${route.method} ${route.path} ${stableStringify(route.body)}`;
    responses.set(key, {
      status: route.status,
      body: readFileSync(join(FIXTURES, route.file), "utf-8"),
    });
  }

  const server: Server = createServer((request, response) => {
    const chunks: Buffer[] = [];
    request.on("data", (chunk) => chunks.push(chunk));
    request.on("end", () => {
      const raw = Buffer.concat(chunks).toString("utf-8");
      const body = raw === "" ? null : JSON.parse(raw);
      const key =
        `${request.method} ${request.url} ${stableStringify(body)}`;
      const recorded = responses.get(key);
      if (recorded === undefined) {
        response.writeHead(404, { "content-type": "application/json" });
        response.end(JSON.stringify({
          error: { code: "unmatched_fixture", message: key },
        }));
        return;
      }
      response.writeHead(recorded.status,
        { "content-type": "application/json" });
      response.end(recorded.body);
    });
  });

  await new Promise<void>((resolve) =>
    server.listen(0, "127.0.0.1", resolve));
  const address = server.address();
  if (address === null || typeof address === "string") {
    throw new Error("fixture server has no port");
  }
  return {
    url: `http://127.0.0.1:${address.port}`,
    close: () =>
      new Promise((resolve, reject) =>
        server.close((err) => (err ? reject(err) : resolve()))),
  };
}
