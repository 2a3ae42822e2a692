// Deterministic layouts: a small force simulation for the region graph and
// a layered placement for the dependency DAG. No randomness, so the same
// payload always lands on the same pixels.

export interface Point {
  x: number;
  y: number;
}

export interface ForceNode extends Point {
  id: number;
}

export function forceLayout(
  ids: number[],
  edges: { a: number; b: number; weight: number }[],
  width: number,
  height: number,
  iterations = 150,
): Map<number, Point> {
  const n = ids.length;
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) * 0.38;
  const nodes: ForceNode[] = ids.map((id, i) => ({
    id,
    x: cx + radius * Math.cos((2 * Math.PI * i) / Math.max(1, n)),
    y: cy + radius * Math.sin((2 * Math.PI * i) / Math.max(1, n)),
  }));
  const index = new Map(ids.map((id, i) => [id, i]));
  const maxW = Math.max(1, ...edges.map((e) => e.weight));
  const ideal = radius * 0.9;
  const k = ideal / Math.sqrt(Math.max(1, n));

  for (let iter = 0; iter < iterations; iter++) {
    const temp = (1 - iter / iterations) * k * 0.6;
    const fx = new Array(n).fill(0);
    const fy = new Array(n).fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = nodes[i].x - nodes[j].x;
        let dy = nodes[i].y - nodes[j].y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1e-6) {
          dx = 0.01 * (i - j);
          dy = 0.01;
          d2 = dx * dx + dy * dy;
        }
        const rep = (k * k) / d2;
        fx[i] += dx * rep;
        fy[i] += dy * rep;
        fx[j] -= dx * rep;
        fy[j] -= dy * rep;
      }
    }
    for (const e of edges) {
      const i = index.get(e.a);
      const j = index.get(e.b);
      if (i === undefined || j === undefined) continue;
      const dx = nodes[j].x - nodes[i].x;
      const dy = nodes[j].y - nodes[i].y;
      const d = Math.sqrt(dx * dx + dy * dy) || 1;
      const pull = ((d - k) / d) * 0.08 * (0.3 + (0.7 * e.weight) / maxW);
      fx[i] += dx * pull;
      fy[i] += dy * pull;
      fx[j] -= dx * pull;
      fy[j] -= dy * pull;
    }
    for (let i = 0; i < n; i++) {
      const mag = Math.sqrt(fx[i] * fx[i] + fy[i] * fy[i]) || 1;
      const step = Math.min(mag, temp);
      nodes[i].x += (fx[i] / mag) * step;
      nodes[i].y += (fy[i] / mag) * step;
      nodes[i].x = Math.max(16, Math.min(width - 16, nodes[i].x));
      nodes[i].y = Math.max(16, Math.min(height - 16, nodes[i].y));
    }
  }
  return new Map(nodes.map((node) => [node.id, { x: node.x, y: node.y }]));
}

/** Quadratic bezier path whose control point is pulled toward an attractor;
 * edges sharing a region pair share the attractor, bundling them visually. */
export function bundledPath(a: Point, b: Point, attractor: Point, strength = 0.45): string {
  const mx = (a.x + b.x) / 2;
  const my = (a.y + b.y) / 2;
  const cx = mx + (attractor.x - mx) * strength;
  const cy = my + (attractor.y - my) * strength;
  return `M ${a.x.toFixed(1)} ${a.y.toFixed(1)} Q ${cx.toFixed(1)} ${cy.toFixed(1)} ${b.x.toFixed(1)} ${b.y.toFixed(1)}`;
}

/** x by layer, y by stable order inside the layer. */
export function layeredLayout(
  nodes: { id: number; layer: number }[],
  width: number,
  height: number,
  margin = 60,
): Map<number, Point> {
  const layers = new Map<number, number[]>();
  for (const node of [...nodes].sort((a, b) => a.id - b.id)) {
    const bucket = layers.get(node.layer) ?? [];
    bucket.push(node.id);
    layers.set(node.layer, bucket);
  }
  const layerIds = [...layers.keys()].sort((a, b) => a - b);
  const dx = layerIds.length > 1 ? (width - 2 * margin) / (layerIds.length - 1) : 0;
  const out = new Map<number, Point>();
  layerIds.forEach((layer, li) => {
    const column = layers.get(layer)!;
    const dy = height / (column.length + 1);
    column.forEach((id, row) => {
      out.set(id, { x: margin + li * dx, y: dy * (row + 1) });
    });
  });
  return out;
}
