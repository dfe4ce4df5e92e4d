/**
 * Deterministic layered layout: detailing grows downward, exploration fans
 * out horizontally under its context, so successive renders stay visually
 * stable and facilitators can track deltas rather than absolute positions.
 */

import type { ConsoleSessionView, EdgeView } from "./store.js";

export interface NodePosition {
  x: number;
  y: number;
}

export function layoutGraph(
  icnIds: string[],
  edges: EdgeView[],
): Map<string, NodePosition> {
  const children = new Map<string, { kind: string; dst: string }[]>();
  const hasParent = new Set<string>();
  for (const edge of edges) {
    if (edge.kind !== "detailing" && edge.kind !== "exploration") continue;
    if (!children.has(edge.src)) children.set(edge.src, []);
    children.get(edge.src)!.push({ kind: edge.kind, dst: edge.dst });
    hasParent.add(edge.dst);
  }
  for (const kids of children.values()) {
    kids.sort((a, b) => (a.dst < b.dst ? -1 : a.dst > b.dst ? 1 : 0));
  }
  const roots = [...icnIds].sort().filter((id) => !hasParent.has(id));

  const positions = new Map<string, NodePosition>();
  let nextX = 0;

  const place = (node: string, depth: number): number => {
    const kids = children.get(node) ?? [];
    let x: number;
    if (kids.length === 0) {
      x = nextX;
      nextX += 1;
    } else {
      const xs = kids.map(({ kind, dst }) =>
        place(dst, depth + (kind === "detailing" ? 1.0 : 0.6)),
      );
      x = xs.reduce((a, b) => a + b, 0) / xs.length;
    }
    positions.set(node, { x, y: -depth });
    return x;
  };

  for (const root of roots) {
    place(root, 0);
    nextX += 0.5;
  }
  // orphans (e.g. mid-stream before their edge arrived) park on the right
  for (const id of [...icnIds].sort()) {
    if (!positions.has(id)) {
      positions.set(id, { x: nextX, y: 0 });
      nextX += 1;
    }
  }
  return positions;
}

export function layoutView(view: ConsoleSessionView): Map<string, NodePosition> {
  return layoutGraph([...view.icns.keys()], view.edges);
}
