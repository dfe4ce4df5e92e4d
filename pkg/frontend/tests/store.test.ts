import { describe, expect, it } from "vitest";

import {
  applyBatch,
  applyEvent,
  clearDraft,
  draftUtterance,
  isomorphicToSnapshot,
  logIntervention,
  newView,
  sparkline,
} from "../src/store.js";
import type { MetricsReport, SessionEventRecord, Snapshot } from "../src/types.js";

const report = (at: number, alternatives: number): MetricsReport => ({
  fulfilled_requirements: { count: 0, ratio: 0, evidence: [] },
  exploration: { alternative_count: alternatives, switch_count: 0, evidence: [] },
  substantiated_decisions: { ratio: 0, orphan_count: 0 },
  backtracking: { count: 0, resolved_count: 0 },
  contradictions: { count: 0, pairs: [] },
  repetitions: { count: 0, productive_count: 0 },
  unconsidered_needs: { count: 0, elements: [] },
  unexplored_items: { count: 0, icn_ids: [] },
  at_utterance: at,
});

function goldenBatch(): SessionEventRecord[] {
  return [
    { seq: 1, kind: "utterance_received", payload: { id: 1, text: "x" } },
    { seq: 2, kind: "ideas_extracted", payload: { utterance: 1, triples: [] } },
    { seq: 3, kind: "context_adjusted", payload: { idea: "1.0" } },
    {
      seq: 4,
      kind: "icn_created",
      payload: {
        icn_id: "icn-000",
        decision: "new_root",
        idea: { source_utterance: 1, ordinal: 0 },
      },
    },
    { seq: 5, kind: "image_tagged", payload: { icn_id: "icn-000", image: "desired_solution" } },
    { seq: 6, kind: "delta_computed", payload: {} },
    { seq: 7, kind: "metrics_updated", payload: { utterance: 1, report: report(1, 0) } },
  ];
}

describe("event application", () => {
  it("builds the graph mirror from a batch", () => {
    const view = newView();
    expect(applyBatch(view, goldenBatch())).toBe(7);
    expect(view.lastSeq).toBe(7);
    expect(view.utteranceCount).toBe(1);
    expect(view.icns.get("icn-000")?.image).toBe("desired_solution");
    expect(view.icns.get("icn-000")?.memberKeys).toEqual(["1.0"]);
    expect(view.metrics?.at_utterance).toBe(1);
    expect(view.highlights.icns).toContain("icn-000");
  });

  it("dedups by seq on reconnect overlap", () => {
    const view = newView();
    const batch = goldenBatch();
    applyBatch(view, batch);
    // replayed overlap: same events again, then one genuinely new one
    const overlap = [
      ...batch,
      {
        seq: 8,
        kind: "icn_joined",
        payload: { icn_id: "icn-000", idea: { source_utterance: 2, ordinal: 0 } },
      },
    ];
    expect(applyBatch(view, overlap)).toBe(1);
    expect(view.icns.get("icn-000")?.memberKeys).toEqual(["1.0", "2.0"]);
    expect(view.utteranceCount).toBe(1); // no double-count
  });

  it("never applies across a gap", () => {
    const view = newView();
    const ok = applyEvent(view, { seq: 5, kind: "utterance_received", payload: {} });
    expect(ok).toBe(false);
    expect(view.lastSeq).toBe(0);
  });

  it("tracks edges and their payload elements", () => {
    const view = newView();
    applyBatch(view, goldenBatch());
    applyEvent(view, {
      seq: 8,
      kind: "icn_created",
      payload: { icn_id: "icn-001", decision: "new_detailing", idea: { source_utterance: 2, ordinal: 0 } },
    });
    applyEvent(view, {
      seq: 9,
      kind: "edge_added",
      payload: {
        src: "icn-000",
        dst: "icn-001",
        kind: "detailing",
        payload: { elements: ["entire", "length"] },
      },
    });
    expect(view.edges).toEqual([
      { src: "icn-000", dst: "icn-001", kind: "detailing", elements: ["entire", "length"] },
    ]);
  });

  it("appends one sparkline point per metrics event", () => {
    const view = newView();
    applyBatch(view, goldenBatch());
    applyEvent(view, { seq: 8, kind: "metrics_updated", payload: { utterance: 2, report: report(2, 1) } });
    applyEvent(view, { seq: 9, kind: "metrics_updated", payload: { utterance: 3, report: report(3, 3) } });
    expect(sparkline(view, (r) => r.exploration.alternative_count)).toEqual([0, 1, 3]);
  });
});

describe("drafts and interventions", () => {
  it("draft survives failures and advances on clear", () => {
    const view = newView();
    view.draft.speaker = "F";
    view.draft.text = "Shift left";
    const body = draftUtterance(view);
    expect(body).toMatchObject({ id: 1, speaker: "F", text: "Shift left" });
    expect(body.triples).toBeUndefined();
    clearDraft(view);
    expect(view.draft.nextId).toBe(2);
    expect(view.draft.text).toBe("");
  });

  it("logs interventions with the current seq", () => {
    const view = newView();
    applyBatch(view, goldenBatch());
    logIntervention(view, "asked B to elaborate");
    expect(view.interventionLog).toEqual([{ at: 7, note: "asked B to elaborate" }]);
  });
});

describe("isomorphism check", () => {
  const snapshot = (image: string): Snapshot =>
    ({
      session: "s",
      at_seq: 7,
      config: {},
      problem_elements: [],
      graph: {
        icns: {
          "icn-000": {
            id: "icn-000",
            members: [{ verb: "x", source_utterance: 1, ordinal: 0 }],
            te: [],
            ev: [],
            image,
            created_at: 1,
            parent_id: null,
            detail_payload: [],
            context_id: null,
          },
        },
        edges: [],
        roots: ["icn-000"],
      },
      context: {},
      metrics: report(1, 0),
      history: [],
    }) as unknown as Snapshot;

  it("accepts the matching snapshot and rejects a differing tag", () => {
    const view = newView();
    applyBatch(view, goldenBatch());
    expect(isomorphicToSnapshot(view, snapshot("desired_solution"))).toBe(true);
    expect(isomorphicToSnapshot(view, snapshot("problem"))).toBe(false);
  });
});
