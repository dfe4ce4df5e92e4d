/** Wire types for the icnflow HTTP API (the console's only backend). */

export interface ApiSessionDescriptor {
  session_id: string;
  created_at: string;
  utterance_count: number;
  config: Record<string, number>;
}

export interface TripleRecord {
  verb: string | null;
  noun1?: string | null;
  noun2?: string[];
  modifiers?: string[];
  source_utterance?: number;
  ordinal?: number;
  assertion_only?: boolean;
  cues?: string[];
  expected_outputs?: string[];
  goals?: string[];
}

export interface UtterancePayload {
  id: number;
  speaker: string;
  t_ms: number;
  text: string;
  triples?: TripleRecord[];
}

export interface SessionEventRecord {
  seq: number;
  kind: string;
  payload: Record<string, any>;
}

export interface MetricsReport {
  fulfilled_requirements: { count: number; ratio: number; evidence: unknown[] };
  exploration: { alternative_count: number; switch_count: number; evidence: unknown[] };
  substantiated_decisions: { ratio: number; orphan_count: number };
  backtracking: { count: number; resolved_count: number };
  contradictions: { count: number; pairs: unknown[] };
  repetitions: { count: number; productive_count: number };
  unconsidered_needs: { count: number; elements: string[] };
  unexplored_items: { count: number; icn_ids: string[] };
  at_utterance: number;
}

export interface EdgeRecord {
  src: string;
  dst: string;
  kind: string;
  payload: Record<string, unknown>;
}

export interface SnapshotIcn {
  id: string;
  members: TripleRecord[];
  te: string[];
  ev: string[];
  image: string | null;
  created_at: number;
  parent_id: string | null;
  detail_payload: string[];
  context_id: string | null;
}

export interface Snapshot {
  session: string;
  at_seq: number;
  config: Record<string, number>;
  problem_elements: string[];
  graph: { icns: Record<string, SnapshotIcn>; edges: EdgeRecord[]; roots: string[] };
  context: Record<string, unknown>;
  metrics: MetricsReport;
  history: unknown[];
}

export interface PostUtteranceResponse {
  events: SessionEventRecord[];
  metrics: MetricsReport;
  metrics_delta: Record<string, unknown>;
  graph_fragment: { icns: Record<string, SnapshotIcn>; edges: unknown[] };
  at_seq: number;
}
