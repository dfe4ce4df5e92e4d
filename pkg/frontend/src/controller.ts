/**
 * Console actions: submit the pending utterance and follow the live stream.
 * All server mutations flow through explicit calls here; the store stays a
 * pure mirror of what the server streamed back.
 */

import { ApiError, ConsoleApi } from "./api.js";
import {
  applyBatch,
  applyEvent,
  clearDraft,
  draftUtterance,
  type ConsoleSessionView,
} from "./store.js";
import type { PostUtteranceResponse } from "./types.js";

export interface SubmitResult {
  ok: boolean;
  error?: string;
  applied?: number;
  response?: PostUtteranceResponse;
}

/**
 * POST the pending draft. On success the returned events are applied (new
 * nodes and edges land in `highlights`) and the draft advances; on a
 * conflict or validation error the draft is preserved and the error is
 * surfaced inline via `view.lastError`.
 */
export async function submitUtterance(
  api: ConsoleApi,
  view: ConsoleSessionView,
  sessionId: string,
): Promise<SubmitResult> {
  const body = draftUtterance(view);
  try {
    const response = await api.postUtterance(sessionId, body);
    const applied = applyBatch(view, response.events);
    view.metrics = response.metrics;
    clearDraft(view);
    return { ok: true, applied, response };
  } catch (error) {
    if (error instanceof ApiError) {
      view.lastError = error.detail; // draft intentionally kept
      return { ok: false, error: error.detail };
    }
    throw error;
  }
}

export interface FollowOptions {
  follow?: boolean;
  maxReconnects?: number;
  signal?: AbortSignal;
}

/**
 * Stream events from the last seen seq, applying them in order with dedup,
 * reconnecting after drops. Resolves with the number of events applied
 * (drain mode) or when aborted (live mode).
 */
export async function followStream(
  api: ConsoleApi,
  view: ConsoleSessionView,
  sessionId: string,
  options: FollowOptions = {},
): Promise<number> {
  const maxReconnects = options.maxReconnects ?? 3;
  let appliedTotal = 0;
  let attempt = 0;
  view.connection = "connecting";
  for (;;) {
    try {
      await api.streamEvents(
        sessionId,
        view.lastSeq + 1,
        (event) => {
          if (applyEvent(view, event)) appliedTotal += 1;
          view.connection = "live";
        },
        { follow: options.follow, signal: options.signal },
      );
      view.connection = "idle";
      return appliedTotal;
    } catch (error) {
      attempt += 1;
      view.connection = "dropped";
      if (options.signal?.aborted || attempt > maxReconnects) {
        if (options.signal?.aborted) return appliedTotal;
        throw error;
      }
      // resume from view.lastSeq + 1; duplicates are dropped by seq
    }
  }
}
