// Region graph: one circle per process, bundled links, two color modes.

import { blueRed, regionColor } from "../color.js";
import { bundledPath, forceLayout } from "../layout.js";
import { group, Mark, Scene } from "../scene.js";
import { RegionsPayload } from "../types.js";
import { RegionMode } from "../state.js";

export interface RegionViewOptions {
  width?: number;
  height?: number;
  mode?: RegionMode;
  selected?: number | null;
}

export function regionView(payload: RegionsPayload, options: RegionViewOptions = {}): Scene {
  const width = options.width ?? 720;
  const height = options.height ?? 520;
  const mode = options.mode ?? "cluster";

  const pids = payload.processes.map((p) => p.pid);
  const regionOf = new Map(payload.processes.map((p) => [p.pid, p.region]));
  const positions = forceLayout(pids, payload.process_edges, width, height);

  const rls = payload.regions.map((r) => r.rl ?? 0);
  const rlMax = Math.max(1e-9, ...rls);
  const fillOf = (pid: number): string => {
    const region = regionOf.get(pid) ?? 0;
    if (mode === "latency") {
      const rl = payload.regions.find((r) => r.id === region)?.rl ?? 0;
      return blueRed(rl / rlMax);
    }
    return regionColor(region);
  };

  // region centroids act as bundling attractors for same-pair edges
  const centroid = new Map<number, { x: number; y: number; n: number }>();
  for (const p of payload.processes) {
    const pos = positions.get(p.pid)!;
    const c = centroid.get(p.region) ?? { x: 0, y: 0, n: 0 };
    centroid.set(p.region, { x: c.x + pos.x, y: c.y + pos.y, n: c.n + 1 });
  }
  const centroidOf = (region: number) => {
    const c = centroid.get(region)!;
    return { x: c.x / c.n, y: c.y / c.n };
  };

  const wMax = Math.max(1, ...payload.process_edges.map((e) => e.weight));
  const edgeMarks: Mark[] = payload.process_edges.map((e) => {
    const a = positions.get(e.a)!;
    const b = positions.get(e.b)!;
    const ra = regionOf.get(e.a)!;
    const rb = regionOf.get(e.b)!;
    const ca = centroidOf(ra);
    const cb = centroidOf(rb);
    const attractor = { x: (ca.x + cb.x) / 2, y: (ca.y + cb.y) / 2 };
    return {
      kind: "path",
      d: bundledPath(a, b, attractor, ra === rb ? 0.25 : 0.55),
      stroke: ra === rb ? fillOf(e.a) : "#b0b0b0",
      width: 0.5 + (2.5 * e.weight) / wMax,
      data: { role: "process-edge", a: e.a, b: e.b, weight: e.weight },
      title: `${e.a} - ${e.b}: ${e.weight} messages`,
    };
  });

  const nodeMarks: Mark[] = payload.processes.map((p) => {
    const pos = positions.get(p.pid)!;
    return {
      kind: "circle",
      x: pos.x,
      y: pos.y,
      r: options.selected === p.region ? 8 : 6,
      fill: fillOf(p.pid),
      stroke: options.selected === p.region ? "#222222" : undefined,
      data: { role: "process", pid: p.pid, region: p.region },
      title: `process ${p.pid} (region ${p.region})`,
    };
  });

  const legend: Mark[] = payload.regions.map((r, i) => ({
    kind: "text",
    x: 12,
    y: 18 + 16 * i,
    text: `region ${r.id}: ${r.members.length} procs` + (r.rl !== null ? `, RL ${r.rl.toFixed(2)}` : ""),
    size: 11,
    fill: mode === "latency" ? blueRed((r.rl ?? 0) / rlMax) : regionColor(r.id),
    data: { role: "legend", region: r.id },
  }));

  return {
    width,
    height,
    root: group([group(edgeMarks, "edges"), group(nodeMarks, "nodes"), group(legend, "legend")]),
  };
}
