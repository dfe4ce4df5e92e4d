/**
 * Console session state: a client-side mirror of the server's graph built
 * purely from streamed events, plus metric history and facilitator drafts.
 *
 * Nothing here is authoritative: replaying the event stream (or a page
 * reload followed by a stream from seq 1) reconstructs the identical view.
 * Events are applied in seq order and deduplicated by seq, so reconnects
 * may deliver overlaps safely.
 */

import type {
  ApiSessionDescriptor,
  MetricsReport,
  SessionEventRecord,
  Snapshot,
  TripleRecord,
  UtterancePayload,
} from "./types.js";

export interface IcnView {
  id: string;
  image: string | null;
  memberKeys: string[];
  decision: string;
}

export interface EdgeView {
  src: string;
  dst: string;
  kind: string;
  elements: string[];
}

export interface Draft {
  nextId: number;
  speaker: string;
  text: string;
  triples: TripleRecord[];
}

export interface InterventionNote {
  at: number; // last seq when the note was taken
  note: string;
}

export interface Highlights {
  icns: string[];
  edges: number;
}

export interface ConsoleSessionView {
  descriptor: ApiSessionDescriptor | null;
  lastSeq: number;
  icns: Map<string, IcnView>;
  edges: EdgeView[];
  utteranceCount: number;
  metrics: MetricsReport | null;
  metricHistory: MetricsReport[];
  draft: Draft;
  interventionLog: InterventionNote[];
  connection: "idle" | "connecting" | "live" | "dropped";
  highlights: Highlights;
  lastError: string | null;
}

export function newView(): ConsoleSessionView {
  return {
    descriptor: null,
    lastSeq: 0,
    icns: new Map(),
    edges: [],
    utteranceCount: 0,
    metrics: null,
    metricHistory: [],
    draft: { nextId: 1, speaker: "", text: "", triples: [] },
    interventionLog: [],
    connection: "idle",
    highlights: { icns: [], edges: 0 },
    lastError: null,
  };
}

function tripleKey(triple: Record<string, any>): string {
  return `${triple.source_utterance}.${triple.ordinal}`;
}

/** Apply one event; returns false when it was a duplicate or out of order. */
export function applyEvent(view: ConsoleSessionView, event: SessionEventRecord): boolean {
  if (event.seq <= view.lastSeq) return false; // dedup on reconnect
  if (event.seq !== view.lastSeq + 1) return false; // never apply with a gap
  view.lastSeq = event.seq;
  const payload = event.payload;
  switch (event.kind) {
    case "utterance_received":
      view.utteranceCount += 1;
      break;
    case "icn_created":
      view.icns.set(payload.icn_id, {
        id: payload.icn_id,
        image: null,
        memberKeys: [tripleKey(payload.idea)],
        decision: payload.decision,
      });
      view.highlights.icns.push(payload.icn_id);
      break;
    case "icn_joined": {
      const icn = view.icns.get(payload.icn_id);
      if (icn) icn.memberKeys.push(tripleKey(payload.idea));
      view.highlights.icns.push(payload.icn_id);
      break;
    }
    case "image_tagged": {
      const icn = view.icns.get(payload.icn_id);
      if (icn) icn.image = payload.image;
      break;
    }
    case "edge_added":
      view.edges.push({
        src: payload.src,
        dst: payload.dst,
        kind: payload.kind,
        elements: (payload.payload && payload.payload.elements) || [],
      });
      view.highlights.edges += 1;
      break;
    case "metrics_updated":
      view.metrics = payload.report as MetricsReport;
      view.metricHistory.push(view.metrics); // one sparkline point per event
      break;
    default:
      break; // context/adjustment/delta/error events carry no view state
  }
  return true;
}

export function applyBatch(view: ConsoleSessionView, events: SessionEventRecord[]): number {
  view.highlights = { icns: [], edges: 0 };
  let applied = 0;
  const ordered = [...events].sort((a, b) => a.seq - b.seq);
  for (const event of ordered) {
    if (applyEvent(view, event)) applied += 1;
  }
  return applied;
}

/** Sparkline series for one metric family, in report order. */
export function sparkline(view: ConsoleSessionView, pick: (r: MetricsReport) => number): number[] {
  return view.metricHistory.map(pick);
}

export function logIntervention(view: ConsoleSessionView, note: string): void {
  view.interventionLog.push({ at: view.lastSeq, note });
}

export function draftUtterance(view: ConsoleSessionView): UtterancePayload {
  const body: UtterancePayload = {
    id: view.draft.nextId,
    speaker: view.draft.speaker,
    t_ms: view.draft.nextId * 1000,
    text: view.draft.text,
  };
  if (view.draft.triples.length > 0) body.triples = view.draft.triples;
  return body;
}

/** After a successful submit: advance the draft; on failure it is kept. */
export function clearDraft(view: ConsoleSessionView): void {
  view.draft = { nextId: view.draft.nextId + 1, speaker: view.draft.speaker, text: "", triples: [] };
  view.lastError = null;
}

/**
 * View convergence check against GET /snapshot: node ids, edge kinds, image
 * tags, and member keys must all agree once the stream is idle.
 */
export function isomorphicToSnapshot(view: ConsoleSessionView, snapshot: Snapshot): boolean {
  const snapshotIds = Object.keys(snapshot.graph.icns).sort();
  const viewIds = [...view.icns.keys()].sort();
  if (JSON.stringify(snapshotIds) !== JSON.stringify(viewIds)) return false;
  for (const id of snapshotIds) {
    const theirs = snapshot.graph.icns[id]!;
    const ours = view.icns.get(id)!;
    if (ours.image !== theirs.image) return false;
    const theirKeys = theirs.members
      .map((m) => `${m.source_utterance}.${m.ordinal}`)
      .sort();
    const ourKeys = [...ours.memberKeys].sort();
    if (JSON.stringify(theirKeys) !== JSON.stringify(ourKeys)) return false;
  }
  const edgeSig = (edges: { src: string; dst: string; kind: string }[]) =>
    edges
      .map((e) => `${e.src}->${e.dst}:${e.kind}`)
      .sort()
      .join("|");
  return edgeSig(view.edges) === edgeSig(snapshot.graph.edges);
}
