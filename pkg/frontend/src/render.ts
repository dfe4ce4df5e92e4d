/**
 * Pure HTML/SVG renderers. Keeping these as string producers makes every
 * visual testable without a DOM; the browser shell just assigns innerHTML.
 */

import { layoutView } from "./layout.js";
import { sparkline, type ConsoleSessionView } from "./store.js";
import type { MetricsReport } from "./types.js";

/** Metric panels in the canonical category order with their category names. */
export const METRIC_PANELS: {
  key: string;
  label: string;
  value: (r: MetricsReport) => number;
  detail: (r: MetricsReport) => string;
}[] = [
  {
    key: "fulfilled_requirements",
    label: "Fulfilled requirements",
    value: (r) => r.fulfilled_requirements.count,
    detail: (r) => `ratio ${r.fulfilled_requirements.ratio.toFixed(2)}`,
  },
  {
    key: "exploration",
    label: "Exploration",
    value: (r) => r.exploration.alternative_count,
    detail: (r) => `${r.exploration.switch_count} switches`,
  },
  {
    key: "substantiated_decisions",
    label: "Substantiated decisions",
    value: (r) => r.substantiated_decisions.ratio,
    detail: (r) => `${r.substantiated_decisions.orphan_count} orphans`,
  },
  {
    key: "backtracking",
    label: "Backtracking",
    value: (r) => r.backtracking.count,
    detail: (r) => `${r.backtracking.resolved_count} resolved`,
  },
  {
    key: "contradictions",
    label: "Contradictions",
    value: (r) => r.contradictions.count,
    detail: () => "",
  },
  {
    key: "repetitions",
    label: "Repetitions",
    value: (r) => r.repetitions.count,
    detail: (r) => `${r.repetitions.productive_count} productive`,
  },
  {
    key: "unconsidered_needs",
    label: "Unconsidered needs",
    value: (r) => r.unconsidered_needs.count,
    detail: (r) => r.unconsidered_needs.elements.slice(0, 4).join(", "),
  },
  {
    key: "unexplored_items",
    label: "Unexplored items",
    value: (r) => r.unexplored_items.count,
    detail: (r) => r.unexplored_items.icn_ids.join(", "),
  },
];

const escapeHtml = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

function sparklineSvg(points: number[]): string {
  if (points.length === 0) return "<svg class='spark' width='120' height='24'></svg>";
  const max = Math.max(...points, 1);
  const step = points.length > 1 ? 116 / (points.length - 1) : 0;
  const coords = points
    .map((p, i) => `${(2 + i * step).toFixed(1)},${(22 - (p / max) * 20).toFixed(1)}`)
    .join(" ");
  return `<svg class="spark" width="120" height="24"><polyline fill="none" stroke="#2a7" stroke-width="1.5" points="${coords}"/></svg>`;
}

export function renderMetricPanels(view: ConsoleSessionView): string {
  const report = view.metrics;
  const panels = METRIC_PANELS.map((panel, index) => {
    const value = report === null ? "–" : String(panel.value(report));
    const detail = report === null ? "" : panel.detail(report);
    const series = report === null ? [] : sparkline(view, panel.value);
    return (
      `<div class="panel" data-family="${panel.key}">` +
      `<h3>(${index + 1}) ${panel.label}</h3>` +
      `<div class="value">${escapeHtml(value)}</div>` +
      `<div class="detail">${escapeHtml(detail)}</div>` +
      sparklineSvg(series) +
      `</div>`
    );
  });
  return `<div class="panels">${panels.join("")}</div>`;
}

const IMAGE_COLORS: Record<string, string> = {
  problem: "#d9e8fb",
  desired_solution: "#fdf3c7",
  existing_solution: "#f3e2c7",
  expected_behavior: "#d8f2d8",
  observed_behavior: "#c8e8e0",
  causality_of_differences: "#e8d8f2",
  needed_solution_changes: "#fbd9d9",
  needed_problem_changes: "#fbd9ec",
};

const EDGE_DASH: Record<string, string> = {
  detailing: "",
  exploration: "6,4",
  causality: "2,3",
  generalization: "8,2,2,2",
};

export function renderGraphSvg(view: ConsoleSessionView): string {
  const positions = layoutView(view);
  if (positions.size === 0) {
    return `<svg width="400" height="120"><text x="12" y="24">no clusters yet</text></svg>`;
  }
  const xs = [...positions.values()].map((p) => p.x);
  const ys = [...positions.values()].map((p) => p.y);
  const scaleX = 150;
  const scaleY = 110;
  const pad = 70;
  const originX = pad - Math.min(...xs) * scaleX;
  const originY = pad + Math.max(...ys) * scaleY;
  const width = (Math.max(...xs) - Math.min(...xs)) * scaleX + 2 * pad;
  const height = (Math.max(...ys) - Math.min(...ys)) * scaleY + 2 * pad;
  const px = (x: number) => originX + x * scaleX;
  const py = (y: number) => originY - y * scaleY;

  const parts: string[] = [];
  for (const edge of view.edges) {
    const a = positions.get(edge.src);
    const b = positions.get(edge.dst);
    if (!a || !b) continue;
    const dash = EDGE_DASH[edge.kind] ?? "";
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    parts.push(
      `<line class="edge edge-${edge.kind}" x1="${px(a.x)}" y1="${py(a.y) + 18}"` +
        ` x2="${px(b.x)}" y2="${py(b.y) - 18}" stroke="#555"${dashAttr}/>`,
    );
    if (edge.kind === "detailing" && edge.elements.length > 0) {
      parts.push(
        `<text class="edge-label" x="${(px(a.x) + px(b.x)) / 2}" y="${(py(a.y) + py(b.y)) / 2}"` +
          ` font-size="9" fill="#555">${escapeHtml(edge.elements.join(", "))}</text>`,
      );
    }
  }
  for (const [id, pos] of [...positions.entries()].sort()) {
    const icn = view.icns.get(id);
    const image = icn?.image ?? "untagged";
    const fill = IMAGE_COLORS[image] ?? "#eeeeee";
    const pulse = view.highlights.icns.includes(id) ? " pulse" : "";
    parts.push(
      `<g class="icn${pulse}" data-icn="${id}" data-image="${escapeHtml(image)}">` +
        `<rect x="${px(pos.x) - 58}" y="${py(pos.y) - 18}" width="116" height="36" rx="6"` +
        ` fill="${fill}" stroke="#333"/>` +
        `<text x="${px(pos.x)}" y="${py(pos.y) - 4}" text-anchor="middle" font-size="10">${id}</text>` +
        `<text x="${px(pos.x)}" y="${py(pos.y) + 9}" text-anchor="middle" font-size="8">` +
        `${escapeHtml(image)} (${icn?.memberKeys.length ?? 0})</text>` +
        `</g>`,
    );
  }
  return `<svg width="${Math.ceil(width)}" height="${Math.ceil(height)}" class="graph">${parts.join("")}</svg>`;
}

export function renderStatus(view: ConsoleSessionView): string {
  const descriptor = view.descriptor;
  const head = descriptor ? `session ${descriptor.session_id}` : "no session";
  const error = view.lastError ? `<span class="error">${escapeHtml(view.lastError)}</span>` : "";
  return (
    `<div class="status" data-connection="${view.connection}">` +
    `${escapeHtml(head)} · seq ${view.lastSeq} · ${view.utteranceCount} utterances · ` +
    `${view.connection}${error}</div>`
  );
}
