// Evolution timeline: a circle per period; color encodes the period's mean
// latency, size its delayed-message count. A window selection drives the
// DAG and attribution views.

import { blueRed } from "../color.js";
import { group, Mark, Scene } from "../scene.js";
import { EvolutionPayload } from "../types.js";

export interface EvolutionViewOptions {
  width?: number;
  height?: number;
  windowStart?: number | null;
  windowEnd?: number | null;
}

export const MIN_RADIUS = 6;
export const MAX_RADIUS = 22;

export function evolutionView(payload: EvolutionPayload, options: EvolutionViewOptions = {}): Scene {
  const width = options.width ?? 720;
  const height = options.height ?? 180;
  const margin = 40;
  const baseline = height / 2;

  const t0 = payload.periods.length ? payload.periods[0].start : 0;
  const t1 = payload.periods.length ? payload.periods[payload.periods.length - 1].end : 1;
  const span = Math.max(1, t1 - t0);
  const xOf = (ts: number) => margin + ((ts - t0) / span) * (width - 2 * margin);

  const maxDelayed = Math.max(1, ...payload.periods.map((p) => p.delayed));
  // the region average sits mid-scale, twice the average saturates red
  const colorOf = (meanL: number) => blueRed(meanL / (2 * Math.max(1e-9, payload.ave_region)));

  const axis: Mark[] = [
    { kind: "line", x1: margin, y1: baseline, x2: width - margin, y2: baseline, stroke: "#cccccc" },
    { kind: "text", x: margin, y: height - 8, text: `${t0} us`, size: 10, fill: "#666666" },
    {
      kind: "text", x: width - margin, y: height - 8, text: `${t1} us`,
      size: 10, fill: "#666666", anchor: "end",
    },
  ];

  const circles: Mark[] = payload.periods.map((p, index) => ({
    kind: "circle",
    x: xOf(p.mid),
    y: baseline,
    r: MIN_RADIUS + (MAX_RADIUS - MIN_RADIUS) * (p.delayed / maxDelayed),
    fill: colorOf(p.mean_l),
    stroke: p.tag === "compressed" ? "#bbbbbb" : "#444444",
    data: {
      role: "period",
      index,
      tag: p.tag,
      start: p.start,
      end: p.end,
      mean_l: p.mean_l,
      delayed: p.delayed,
    },
    title: `${p.tag} [${p.start}, ${p.end}) mean L ${p.mean_l.toFixed(2)}, ${p.delayed} delayed`,
  }));

  const overlay: Mark[] = [];
  if (options.windowStart !== null && options.windowStart !== undefined
      && options.windowEnd !== null && options.windowEnd !== undefined) {
    const x1 = xOf(options.windowStart);
    const x2 = xOf(options.windowEnd);
    overlay.push({
      kind: "rect",
      x: x1,
      y: 12,
      width: Math.max(1, x2 - x1),
      height: height - 36,
      fill: "rgba(100, 140, 220, 0.15)",
      data: { role: "window", start: options.windowStart, end: options.windowEnd },
    });
  }

  return {
    width,
    height,
    root: group([group(axis, "axis"), group(overlay, "window"), group(circles, "periods")]),
  };
}
