/**
 * Console round trip against the real backend (acceptance criterion 9):
 * submit the golden trace through the console path, follow the stream, and
 * require the rendered view to be isomorphic to GET /snapshot with the
 * case-study exploration count and image tags showing in the panels.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { readFileSync } from "node:fs";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ConsoleApi } from "../src/api.js";
import { followStream, submitUtterance } from "../src/controller.js";
import { renderGraphSvg, renderMetricPanels } from "../src/render.js";
import { applyEvent, isomorphicToSnapshot, newView } from "../src/store.js";
import type { UtterancePayload } from "../src/types.js";

const PORT = 8951;
const BASE = `http://127.0.0.1:${PORT}`;
const DATA_DIR = path.resolve(__dirname, "../../src/icnflow/data");

let server: ChildProcess;
const api = new ConsoleApi(BASE);

function goldenUtterances(): UtterancePayload[] {
  const raw = readFileSync(path.join(DATA_DIR, "case_study.trace.jsonl"), "utf-8");
  return raw
    .split("\n")
    .filter((line) => line.trim())
    .map((line) => JSON.parse(line) as UtterancePayload);
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "icnflow.cli", "serve", "--port", String(PORT), "--host", "127.0.0.1"],
    { stdio: ["ignore", "pipe", "pipe"], cwd: path.resolve(__dirname, "../..") },
  );
  const deadline = Date.now() + 20_000;
  while (Date.now() < deadline) {
    if (await api.health()) return;
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("backend did not come up");
}, 25_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("console against the live backend", () => {
  it("submits the golden trace and converges to the server snapshot", async () => {
    const problem = readFileSync(path.join(DATA_DIR, "case_study.problem.txt"), "utf-8");
    const view = newView();
    view.descriptor = await api.createSession({
      lexicon: "case_study",
      problem_statement: problem,
      session_id: "console-golden",
    });
    const sessionId = view.descriptor.session_id;

    // submit every utterance through the console path (pre-annotations ride along)
    for (const utterance of goldenUtterances()) {
      view.draft = {
        nextId: utterance.id,
        speaker: utterance.speaker,
        text: utterance.text,
        triples: utterance.triples ?? [],
      };
      const result = await submitUtterance(api, view, sessionId);
      expect(result.ok).toBe(true);
    }

    // duplicate id -> inline conflict, draft preserved, graph untouched
    const nodesBefore = view.icns.size;
    view.draft = { nextId: 19, speaker: "B", text: "again", triples: [] };
    const conflict = await submitUtterance(api, view, sessionId);
    expect(conflict.ok).toBe(false);
    expect(view.lastError).toContain("stale");
    expect(view.draft.text).toBe("again"); // draft not lost
    expect(view.icns.size).toBe(nodesBefore);

    // the live stream delivers the rejection event; catching up changes nothing
    await followStream(api, view, sessionId, { follow: false });

    // a reload-from-scratch client rebuilds the identical view from seq 1
    const reloaded = newView();
    const applied = await followStream(api, reloaded, sessionId, { follow: false });
    expect(applied).toBe(view.lastSeq);
    expect(reloaded.lastSeq).toBe(view.lastSeq);

    const snapshot = await api.fetchSnapshot(sessionId);
    expect(isomorphicToSnapshot(view, snapshot)).toBe(true);
    expect(isomorphicToSnapshot(reloaded, snapshot)).toBe(true);

    // criterion 3 value in the metrics panel
    const metrics = await api.fetchMetrics(sessionId);
    expect(metrics.exploration.alternative_count).toBe(3);
    const panels = renderMetricPanels(view);
    expect(panels).toContain("(2) Exploration");
    expect(panels).toMatch(/data-family="exploration"><h3>\(2\) Exploration<\/h3><div class="value">3<\/div>/);

    // criterion 4 tags visible on the rendered graph
    const svg = renderGraphSvg(view);
    for (const image of [
      "expected_behavior",
      "needed_problem_changes",
      "needed_solution_changes",
    ]) {
      expect(svg).toContain(`data-image="${image}"`);
    }

    // rendered node/edge counts equal the golden snapshot counts
    expect(view.icns.size).toBe(Object.keys(snapshot.graph.icns).length);
    expect(view.edges.length).toBe(snapshot.graph.edges.length);
  }, 30_000);

  it("dedups overlapping reconnects without gaps or duplicates", async () => {
    const sessionId = "console-golden";
    // reference: one clean drain of the full log
    const all: import("../src/types.js").SessionEventRecord[] = [];
    await api.streamEvents(sessionId, 1, (event) => void all.push(event), { follow: false });
    expect(all.length).toBeGreaterThan(100);

    // chaos client: drops mid-stream, resumes at or before the last seen seq
    const view = newView();
    let cursor = 1;
    let hops = 0;
    while (view.lastSeq < all.length && hops < 50) {
      hops += 1;
      const dropAfter = Math.min(all.length, view.lastSeq + 17 + (hops % 13));
      await api.streamEvents(
        sessionId,
        cursor,
        (event) => {
          if (event.seq <= dropAfter) applyEvent(view, event); // duplicates rejected by seq
        },
        { follow: false },
      );
      cursor = Math.max(1, view.lastSeq - 3); // resume with overlap
    }
    expect(view.lastSeq).toBe(all.length); // no gaps survived the chaos
    const snapshot = await api.fetchSnapshot(sessionId);
    expect(isomorphicToSnapshot(view, snapshot)).toBe(true);
  }, 20_000);

  it("surfaces unknown-session errors", async () => {
    await expect(api.fetchSnapshot("nope")).rejects.toMatchObject({ status: 404 });
  });
});
