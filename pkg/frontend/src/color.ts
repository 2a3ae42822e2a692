// Color encodings shared by the views.

const CATEGORY = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
  "#76b7b2", "#edc948", "#ff9da7", "#9c755f", "#bab0ac",
];

export function regionColor(regionId: number): string {
  return CATEGORY[regionId % CATEGORY.length];
}

function hex2(v: number): string {
  return Math.round(v).toString(16).padStart(2, "0");
}

/** Blue (low) to red (high) over t in [0, 1]; out-of-range values clamp. */
export function blueRed(t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const from = { r: 0x3b, g: 0x4c, b: 0xc0 };
  const to = { r: 0xb4, g: 0x04, b: 0x26 };
  return (
    "#" +
    hex2(from.r + (to.r - from.r) * c) +
    hex2(from.g + (to.g - from.g) * c) +
    hex2(from.b + (to.b - from.b) * c)
  );
}

/** Latency ratio to color: L = 1 sits mid-scale, L >= 2 saturates red. */
export function latencyColor(l: number | null): string {
  if (l === null) return "#999999";
  return blueRed(l / 2);
}

/** Normalize a value against the max of its cohort; empty cohorts map to 0. */
export function normalize(value: number, max: number): number {
  return max > 0 ? value / max : 0;
}

export const GRAY = "#9b9b9b";
