/** Manual triple annotation on a draft (facilitator override of extraction). */

import type { TripleRecord } from "./types.js";
import type { ConsoleSessionView } from "./store.js";

export class AnnotationError extends Error {}

export interface TripleInput {
  verb?: string;
  noun1?: string;
  noun2?: string[];
  modifiers?: string[];
}

function clean(tokens: string[] | undefined): string[] {
  return (tokens ?? []).map((t) => t.trim().toLowerCase()).filter((t) => t.length > 0);
}

/** Validate and normalize one manual triple; empty verb and empty nouns is an error. */
export function buildTriple(input: TripleInput, ordinal: number): TripleRecord {
  const verb = input.verb?.trim().toLowerCase() || null;
  const noun1 = input.noun1?.trim().toLowerCase() || null;
  const noun2 = clean(input.noun2);
  const modifiers = clean(input.modifiers);
  if (verb === null && noun1 === null && noun2.length === 0 && modifiers.length === 0) {
    throw new AnnotationError("a triple needs a verb or at least one noun/modifier");
  }
  return {
    verb,
    noun1,
    noun2,
    modifiers,
    ordinal,
    assertion_only: verb === null,
  };
}

/** Attach a manual triple to the pending draft. */
export function annotateTriple(view: ConsoleSessionView, input: TripleInput): TripleRecord {
  const triple = buildTriple(input, view.draft.triples.length);
  view.draft.triples.push(triple);
  return triple;
}

/** Drop all manual triples: the submission goes back to plain text. */
export function clearAnnotation(view: ConsoleSessionView): void {
  view.draft.triples = [];
}
