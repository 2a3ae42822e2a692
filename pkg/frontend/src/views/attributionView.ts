// Attribution panel: mapping line+pie, pattern area, traffic multi-line,
// and the verdict with its recommendation.

import { blueRed, GRAY, regionColor } from "../color.js";
import { group, Mark, Scene } from "../scene.js";
import { AttributionPayload } from "../types.js";

const PIE_INTER_COLOR = "#c23b22";
const PIE_INTRA_COLOR = "#4e79a7";

function yellowRed(t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const from = { r: 0xf5, g: 0xd4, b: 0x42 };
  const to = { r: 0xb4, g: 0x04, b: 0x26 };
  const hex = (v: number) => Math.round(v).toString(16).padStart(2, "0");
  return "#" + hex(from.r + (to.r - from.r) * c) + hex(from.g + (to.g - from.g) * c)
    + hex(from.b + (to.b - from.b) * c);
}

function polyline(points: { x: number; y: number }[]): string {
  return points.map((p, i) => `${i === 0 ? "M" : "L"} ${p.x.toFixed(1)} ${p.y.toFixed(1)}`).join(" ");
}

function pieSlice(cx: number, cy: number, r: number, a0: number, a1: number): string {
  const x0 = cx + r * Math.cos(a0);
  const y0 = cy + r * Math.sin(a0);
  const x1 = cx + r * Math.cos(a1);
  const y1 = cy + r * Math.sin(a1);
  const large = a1 - a0 > Math.PI ? 1 : 0;
  return `M ${cx} ${cy} L ${x0.toFixed(1)} ${y0.toFixed(1)} A ${r} ${r} 0 ${large} 1 ${x1.toFixed(1)} ${y1.toFixed(1)} Z`;
}

export function attributionView(payload: AttributionPayload, options: { width?: number; height?: number } = {}): Scene {
  const width = options.width ?? 900;
  const height = options.height ?? 520;
  const chartW = width - 260;
  const rowH = (height - 80) / 3;
  const marks: Mark[] = [];

  const durations = payload.durations;
  const xOf = (i: number) => 50 + (i * (chartW - 70)) / Math.max(1, durations.length - 1);

  // --- mapping: intra/inter lines + totals pie -------------------------------
  const mapping = payload.signals.mapping;
  const mapMax = Math.max(1, ...mapping.series.map((s) => Math.max(s.intra, s.inter)));
  const rowTop = (row: number) => 30 + row * rowH;
  const yOf = (row: number, v: number, vMax: number) =>
    rowTop(row) + (rowH - 50) * (1 - v / vMax);

  marks.push({ kind: "text", x: 12, y: rowTop(0) - 8, text: "mapping: intra vs inter node", size: 12, fill: "#333333" });
  marks.push({
    kind: "path",
    d: polyline(mapping.series.map((s, i) => ({ x: xOf(i), y: yOf(0, s.intra, mapMax) }))),
    stroke: PIE_INTRA_COLOR,
    width: 1.8,
    data: { role: "mapping-line", which: "intra", values: mapping.series.map((s) => s.intra) },
  });
  marks.push({
    kind: "path",
    d: polyline(mapping.series.map((s, i) => ({ x: xOf(i), y: yOf(0, s.inter, mapMax) }))),
    stroke: PIE_INTER_COLOR,
    width: 1.8,
    data: { role: "mapping-line", which: "inter", values: mapping.series.map((s) => s.inter) },
  });

  const total = Math.max(1, mapping.totals.intra + mapping.totals.inter);
  const interAngle = (2 * Math.PI * mapping.totals.inter) / total;
  const pieX = width - 130;
  const pieY = rowTop(0) + rowH / 2 - 20;
  marks.push({
    kind: "path",
    d: pieSlice(pieX, pieY, 42, -Math.PI / 2, -Math.PI / 2 + interAngle),
    fill: PIE_INTER_COLOR,
    data: { role: "pie", which: "inter", share: mapping.totals.inter / total },
    title: `inter-node ${(100 * mapping.totals.inter / total).toFixed(1)}%`,
  });
  marks.push({
    kind: "path",
    d: pieSlice(pieX, pieY, 42, -Math.PI / 2 + interAngle, 1.5 * Math.PI),
    fill: PIE_INTRA_COLOR,
    data: { role: "pie", which: "intra", share: mapping.totals.intra / total },
    title: `intra-node ${(100 * mapping.totals.intra / total).toFixed(1)}%`,
  });

  // --- pattern: imbalance area, yellow-to-red ---------------------------------
  const pattern = payload.signals.pattern;
  const imbMax = Math.max(0.5, ...pattern.series.map((s) => s.imbalance));
  marks.push({ kind: "text", x: 12, y: rowTop(1) - 8, text: "pattern: per-duration load imbalance", size: 12, fill: "#333333" });
  pattern.series.forEach((s, i) => {
    const x0 = i === 0 ? xOf(0) : (xOf(i - 1) + xOf(i)) / 2;
    const x1 = i === pattern.series.length - 1 ? xOf(i) : (xOf(i) + xOf(i + 1)) / 2;
    const h = ((rowH - 50) * s.imbalance) / imbMax;
    marks.push({
      kind: "rect",
      x: x0,
      y: rowTop(1) + (rowH - 50) - h,
      width: Math.max(1, x1 - x0),
      height: Math.max(0, h),
      fill: yellowRed(s.imbalance / imbMax),
      data: { role: "pattern-cell", index: i, imbalance: s.imbalance, mean_lb: s.mean_lb, peak: pattern.peaks.includes(i) },
      title: `imbalance ${s.imbalance.toFixed(2)} (${s.active} active)`,
    });
  });
  for (const peak of pattern.peaks) {
    marks.push({
      kind: "text", x: xOf(peak), y: rowTop(1) + 4, text: "peak", size: 9,
      fill: "#b40426", anchor: "middle", data: { role: "pattern-peak", index: peak },
    });
  }

  // --- traffic: one line per size bucket, least-fluctuating in gray ----------
  const traffic = payload.signals.traffic;
  marks.push({ kind: "text", x: 12, y: rowTop(2) - 8, text: "traffic: normalized mean time per size bucket", size: 12, fill: "#333333" });
  traffic.series_by_bucket.forEach((series, si) => {
    const points: { x: number; y: number }[] = [];
    series.normalized.forEach((v, i) => {
      if (v !== null) points.push({ x: xOf(i), y: rowTop(2) + (rowH - 50) * (1 - v) });
    });
    if (points.length < 2) return;
    const isCalmest = series.bucket_start === traffic.least_fluctuating_bucket;
    const cv = traffic.cv_by_bucket[String(series.bucket_start)] ?? 0;
    marks.push({
      kind: "path",
      d: polyline(points),
      stroke: isCalmest ? GRAY : blueRed(Math.min(1, cv)),
      width: isCalmest ? 1.2 : 1.8,
      data: { role: "traffic-line", bucket: series.bucket_start, cv, calmest: isCalmest },
      title: `bucket ${series.bucket_start} B, CV ${cv.toFixed(3)}`,
    });
    void si;
  });

  // --- verdict ----------------------------------------------------------------
  const vy = height - 34;
  marks.push({
    kind: "text", x: 12, y: vy,
    text: `verdict: ${payload.verdict}` + (payload.poor_mapping_flag ? "  [high inter-node share]" : ""),
    size: 14, fill: "#111111",
    data: { role: "verdict", verdict: payload.verdict, scores: payload.scores },
  });
  marks.push({
    kind: "text", x: 12, y: vy + 18,
    text: `recommendation: ${payload.recommendation}`,
    size: 12, fill: "#444444",
    data: { role: "recommendation", text: payload.recommendation },
  });
  Object.entries(payload.scores).forEach(([cause, score], i) => {
    marks.push({
      kind: "text", x: width - 240, y: vy + 14 * i - 14,
      text: `${cause}: ${score.toFixed(3)}`,
      size: 11,
      fill: cause === payload.verdict ? regionColor(3) : "#777777",
      data: { role: "score", cause, score },
    });
  });

  return { width, height, root: group(marks, "attribution") };
}
