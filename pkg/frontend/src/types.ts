// API payload shapes, mirroring the analysis service's JSON artifacts.
// The client renders these verbatim and computes no analysis of its own.

export interface RegionsPayload {
  threshold: number;
  beta: number;
  max_depth: number;
  regions: RegionInfo[];
  region_edges: { a: number; b: number; weight: number }[];
  processes: { pid: number; region: number }[];
  process_edges: { a: number; b: number; weight: number }[];
  dendrogram: { a: number; b: number; linkage: number }[];
}

export interface RegionInfo {
  id: number;
  members: number[];
  rl: number | null;
  messages: number;
}

export interface EvolutionPayload {
  region: number;
  ave_region: number;
  bucket_us: number;
  periods: EvolutionPeriod[];
}

export interface EvolutionPeriod {
  tag: "growth" | "steady" | "compressed";
  start: number;
  mid: number;
  end: number;
  mean_l: number;
  delayed: number;
  messages: number;
}

export interface DagPayload {
  region: number;
  window: { start: number; end: number };
  load: { mc_avg: number; ad: number; mc: Record<string, number> };
  nodes: DagNode[];
  edges: DagEdge[];
}

export interface DagNode {
  id: number;
  pid: number;
  layer: number;
  lb: number;
  node_latency: number | null;
  events: { kind: string; ts: number; src: number; dst: number; size: number }[];
  sent: GlyphBar[];
  recv: GlyphBar[];
}

export interface GlyphBar {
  size: number;
  t: number;
  l: number | null;
  ts: number;
}

export interface DagEdge {
  from: number;
  to: number;
  size: number;
  t: number;
  l: number | null;
}

export interface AttributionPayload {
  region: number;
  period: { start: number; end: number };
  durations: { start: number; end: number }[];
  signals: {
    mapping: {
      series: { start: number; end: number; intra: number; inter: number }[];
      totals: { intra: number; inter: number; inter_ratio: number };
    };
    pattern: {
      series: { start: number; end: number; mean_lb: number; imbalance: number; active: number }[];
      peaks: number[];
    };
    traffic: {
      series_by_bucket: { bucket_start: number; means: (number | null)[]; normalized: (number | null)[] }[];
      cv_by_bucket: Record<string, number>;
      max_cv: number;
      least_fluctuating_bucket: number | null;
    };
  };
  scores: Record<string, number>;
  verdict: string;
  recommendation: string;
  poor_mapping_flag: boolean;
}
