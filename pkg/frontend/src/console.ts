/**
 * Browser shell: wires the store, controller, and renderers to the page.
 * All state lives in the store; a reload reconstructs the identical view
 * from the API (create/attach, then stream from seq 1).
 */

import { ConsoleApi } from "./api.js";
import { annotateTriple, clearAnnotation, AnnotationError } from "./annotate.js";
import { followStream, submitUtterance } from "./controller.js";
import { renderGraphSvg, renderMetricPanels, renderStatus } from "./render.js";
import { logIntervention, newView } from "./store.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export async function startConsole(): Promise<void> {
  const api = new ConsoleApi("");
  const view = newView();
  let sessionId = "";

  const redraw = () => {
    el("status").innerHTML = renderStatus(view);
    el("graph").innerHTML = renderGraphSvg(view);
    el("metrics").innerHTML = renderMetricPanels(view);
    el("interventions").innerHTML = view.interventionLog
      .map((n) => `<li>[seq ${n.at}] ${n.note}</li>`)
      .join("");
  };

  el<HTMLButtonElement>("create").onclick = async () => {
    const problem = el<HTMLTextAreaElement>("problem").value;
    const descriptor = await api.createSession({
      lexicon: el<HTMLInputElement>("lexicon").value || "case_study",
      problem_statement: problem,
    });
    view.descriptor = descriptor;
    sessionId = descriptor.session_id;
    redraw();
    void followStream(api, view, sessionId, { follow: true, maxReconnects: 1e9 }).catch(() => {
      view.connection = "dropped";
      redraw();
    });
    setInterval(redraw, 500); // stream applies events continuously
  };

  el<HTMLButtonElement>("submit").onclick = async () => {
    view.draft.speaker = el<HTMLInputElement>("speaker").value;
    view.draft.text = el<HTMLTextAreaElement>("text").value;
    const result = await submitUtterance(api, view, sessionId);
    if (result.ok) {
      el<HTMLTextAreaElement>("text").value = "";
      el("annotation").textContent = "";
    }
    redraw();
  };

  el<HTMLButtonElement>("annotate").onclick = () => {
    try {
      const triple = annotateTriple(view, {
        verb: el<HTMLInputElement>("verb").value,
        noun1: el<HTMLInputElement>("noun1").value,
        noun2: el<HTMLInputElement>("noun2").value.split(",").filter(Boolean),
        modifiers: el<HTMLInputElement>("modifiers").value.split(",").filter(Boolean),
      });
      el("annotation").textContent = JSON.stringify(view.draft.triples);
      void triple;
    } catch (error) {
      if (error instanceof AnnotationError) {
        el("annotation").textContent = `invalid triple: ${error.message}`;
      } else {
        throw error;
      }
    }
  };

  el<HTMLButtonElement>("clear-annotation").onclick = () => {
    clearAnnotation(view);
    el("annotation").textContent = "";
  };

  el<HTMLButtonElement>("note").onclick = () => {
    logIntervention(view, el<HTMLInputElement>("note-text").value);
    el<HTMLInputElement>("note-text").value = "";
    redraw();
  };

  redraw();
}

if (typeof document !== "undefined" && document.getElementById("create")) {
  void startConsole();
}
