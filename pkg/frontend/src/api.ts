/** Thin fetch client for the icnflow service; NDJSON stream with resume. */

import type {
  ApiSessionDescriptor,
  PostUtteranceResponse,
  SessionEventRecord,
  Snapshot,
  UtterancePayload,
  MetricsReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(response.status, detail);
}

export interface CreateSessionBody {
  lexicon?: string;
  problem_statement?: string;
  config?: Record<string, number | string>;
  session_id?: string;
}

export class ConsoleApi {
  constructor(readonly baseUrl: string) {}

  async health(): Promise<boolean> {
    try {
      const response = await fetch(`${this.baseUrl}/healthz`);
      return response.ok;
    } catch {
      return false;
    }
  }

  async createSession(body: CreateSessionBody): Promise<ApiSessionDescriptor> {
    const response = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await asError(response);
    return (await response.json()) as ApiSessionDescriptor;
  }

  async postUtterance(
    sessionId: string,
    utterance: UtterancePayload,
  ): Promise<PostUtteranceResponse> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/utterances`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(utterance),
    });
    if (!response.ok) throw await asError(response);
    return (await response.json()) as PostUtteranceResponse;
  }

  async fetchSnapshot(sessionId: string): Promise<Snapshot> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/snapshot`);
    if (!response.ok) throw await asError(response);
    return (await response.json()) as Snapshot;
  }

  async fetchMetrics(sessionId: string): Promise<MetricsReport> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/metrics`);
    if (!response.ok) throw await asError(response);
    return (await response.json()) as MetricsReport;
  }

  /**
   * Read the NDJSON event stream starting at `fromSeq`.
   *
   * `follow=false` drains the log and resolves at the head; with
   * `follow=true` the promise resolves only when the caller aborts or the
   * connection drops. Heartbeat lines (no `payload`) are skipped. Returns
   * the events seen on this connection; dedup is the store's job.
   */
  async streamEvents(
    sessionId: string,
    fromSeq: number,
    onEvent: (event: SessionEventRecord) => void,
    options: { follow?: boolean; signal?: AbortSignal } = {},
  ): Promise<number> {
    const follow = options.follow ? "1" : "0";
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/events?from=${fromSeq}&follow=${follow}`,
      { signal: options.signal },
    );
    if (!response.ok || response.body === null) throw await asError(response);
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffered = "";
    let count = 0;
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffered += decoder.decode(value, { stream: true });
      let newline = buffered.indexOf("\n");
      while (newline >= 0) {
        const line = buffered.slice(0, newline).trim();
        buffered = buffered.slice(newline + 1);
        newline = buffered.indexOf("\n");
        if (!line) continue;
        const record = JSON.parse(line);
        if (record.kind === "heartbeat" || record.payload === undefined) continue;
        onEvent(record as SessionEventRecord);
        count += 1;
      }
    }
    return count;
  }
}
