// Dependency DAG with communication-state glyphs.
//
// Glyph encoding: the center ellipse's fill encodes the node's mean incident
// latency and its flatness the node's load-balance score (minor/major axis
// ratio 1/(1+LB), clipped at 0.25). Bars radiate from the glyph: received
// messages point inward, sent messages outward; bar length encodes
// transmission time, bar thickness message size, bar color the latency ratio.
// Double-clicking a node folds/unfolds its logical-descendant subgraph.

import { latencyColor } from "../color.js";
import { layeredLayout } from "../layout.js";
import { group, Mark, Scene } from "../scene.js";
import { DagPayload } from "../types.js";

export const GLYPH_RADIUS = 22;
export const BAR_MAX_LENGTH = 20;
export const BAR_MIN_WIDTH = 1;
export const BAR_MAX_WIDTH = 5;
export const MIN_FLATNESS = 0.25;

/** Strict descendants of a node along from->to edges. */
export function logicalDescendants(payload: DagPayload, nodeId: number): Set<number> {
  const succs = new Map<number, number[]>();
  for (const e of payload.edges) {
    const bucket = succs.get(e.from) ?? [];
    bucket.push(e.to);
    succs.set(e.from, bucket);
  }
  const seen = new Set<number>();
  const stack = [...(succs.get(nodeId) ?? [])];
  while (stack.length) {
    const id = stack.pop()!;
    if (seen.has(id)) continue;
    seen.add(id);
    stack.push(...(succs.get(id) ?? []));
  }
  seen.delete(nodeId);
  return seen;
}

/** Node ids that remain visible given the folded roots. */
export function visibleNodes(payload: DagPayload, folded: number[]): Set<number> {
  const hidden = new Set<number>();
  for (const root of folded) {
    for (const id of logicalDescendants(payload, root)) hidden.add(id);
  }
  for (const root of folded) hidden.delete(root);   // the folded root stays visible
  return new Set(payload.nodes.filter((n) => !hidden.has(n.id)).map((n) => n.id));
}

export function ellipseFlatness(lb: number): number {
  return Math.max(MIN_FLATNESS, 1 / (1 + lb));
}

export interface DagViewOptions {
  width?: number;
  height?: number;
  folded?: number[];
  hover?: number | null;
}

export function dagView(payload: DagPayload, options: DagViewOptions = {}): Scene {
  const width = options.width ?? 900;
  const height = options.height ?? 560;
  const folded = options.folded ?? [];
  const visible = visibleNodes(payload, folded);

  const shown = payload.nodes.filter((n) => visible.has(n.id));
  const positions = layeredLayout(shown, width, height);

  const allBars = payload.nodes.flatMap((n) => [...n.sent, ...n.recv]);
  const tMax = Math.max(1, ...allBars.map((b) => b.t));
  const sizeMax = Math.max(1, ...allBars.map((b) => b.size));

  const edgeMarks: Mark[] = [];
  for (const e of payload.edges) {
    if (!visible.has(e.from) || !visible.has(e.to)) continue;
    const a = positions.get(e.from)!;
    const b = positions.get(e.to)!;
    const hot = options.hover !== null && options.hover !== undefined
      && (e.from === options.hover || e.to === options.hover);
    edgeMarks.push({
      kind: "line",
      x1: a.x, y1: a.y, x2: b.x, y2: b.y,
      stroke: hot ? "#222222" : latencyColor(e.l),
      width: hot ? 2.5 : 1.2,
      data: { role: "dag-edge", from: e.from, to: e.to, l: e.l, size: e.size, t: e.t },
      title: `msg ${e.size} B, ${e.t} us` + (e.l !== null ? `, L ${e.l.toFixed(2)}` : ""),
    });
  }

  const glyphMarks: Mark[] = [];
  for (const node of shown) {
    const pos = positions.get(node.id)!;
    const flat = ellipseFlatness(node.lb);
    glyphMarks.push({
      kind: "circle",
      x: pos.x, y: pos.y, r: GLYPH_RADIUS,
      fill: "none" as unknown as string,
      stroke: "#d8d8d8",
      data: { role: "glyph-border", node: node.id },
    });
    glyphMarks.push({
      kind: "ellipse",
      x: pos.x,
      y: pos.y,
      rx: GLYPH_RADIUS * 0.66,
      ry: GLYPH_RADIUS * 0.66 * flat,
      fill: latencyColor(node.node_latency),
      stroke: folded.includes(node.id) ? "#000000" : "#555555",
      data: { role: "dag-node", id: node.id, pid: node.pid, lb: node.lb, folded: folded.includes(node.id) },
      title: `process ${node.pid} (node ${node.id}) LB ${node.lb.toFixed(2)}`
        + (node.node_latency !== null ? `, latency ${node.node_latency.toFixed(2)}` : ""),
    });
    glyphMarks.push({
      kind: "text",
      x: pos.x, y: pos.y + 3,
      text: String(node.pid),
      size: 10,
      fill: "#ffffff",
      anchor: "middle",
      data: { role: "glyph-label", node: node.id },
    });

    // bars clockwise by event time: sent outward, received inward
    const bars = [
      ...node.recv.map((b) => ({ ...b, dir: "recv" as const })),
      ...node.sent.map((b) => ({ ...b, dir: "sent" as const })),
    ].sort((a, b) => a.ts - b.ts);
    bars.forEach((bar, i) => {
      const angle = -Math.PI / 2 + (2 * Math.PI * i) / Math.max(1, bars.length);
      const length = (bar.t / tMax) * BAR_MAX_LENGTH;
      const widthPx = BAR_MIN_WIDTH + (bar.size / sizeMax) * (BAR_MAX_WIDTH - BAR_MIN_WIDTH);
      const r0 = GLYPH_RADIUS;
      const r1 = bar.dir === "sent" ? r0 + length : r0 - length;
      glyphMarks.push({
        kind: "line",
        x1: pos.x + r0 * Math.cos(angle),
        y1: pos.y + r0 * Math.sin(angle),
        x2: pos.x + r1 * Math.cos(angle),
        y2: pos.y + r1 * Math.sin(angle),
        stroke: latencyColor(bar.l),
        width: widthPx,
        data: {
          role: "glyph-bar",
          node: node.id,
          dir: bar.dir,
          t: bar.t,
          size: bar.size,
          l: bar.l,
          length,
          thickness: widthPx,
        },
        title: `${bar.dir} ${bar.size} B in ${bar.t} us`,
      });
    });
  }

  return {
    width,
    height,
    root: group([group(edgeMarks, "edges"), group(glyphMarks, "glyphs")]),
  };
}
