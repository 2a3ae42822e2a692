// View state <-> URL hash. Reloading a shared URL restores the exact view.

export type ViewName = "regions" | "evolution" | "dag" | "attribution";
export type RegionMode = "cluster" | "latency";

export interface ViewState {
  session: string | null;
  region: number | null;
  view: ViewName;
  mode: RegionMode;
  start: number | null;        // selected window [start, end) in trace us
  end: number | null;
  folded: number[];            // DAG node ids whose descendants are hidden
}

export const DEFAULT_STATE: ViewState = {
  session: null,
  region: null,
  view: "regions",
  mode: "cluster",
  start: null,
  end: null,
  folded: [],
};

export function encodeState(state: ViewState): string {
  const parts: string[] = [];
  if (state.session !== null) parts.push(`s/${encodeURIComponent(state.session)}`);
  if (state.region !== null) parts.push(`r/${state.region}`);
  const query = new URLSearchParams();
  if (state.view !== DEFAULT_STATE.view) query.set("view", state.view);
  if (state.mode !== DEFAULT_STATE.mode) query.set("mode", state.mode);
  if (state.start !== null) query.set("start", String(state.start));
  if (state.end !== null) query.set("end", String(state.end));
  if (state.folded.length) query.set("folded", [...state.folded].sort((a, b) => a - b).join("."));
  const qs = query.toString();
  return "#/" + parts.join("/") + (qs ? "?" + qs : "");
}

export function decodeState(hash: string): ViewState {
  const state: ViewState = { ...DEFAULT_STATE, folded: [] };
  const body = hash.replace(/^#\/?/, "");
  const [path, qs] = body.split("?", 2);
  const segments = path.split("/").filter((s) => s.length > 0);
  for (let i = 0; i + 1 < segments.length; i += 2) {
    if (segments[i] === "s") state.session = decodeURIComponent(segments[i + 1]);
    if (segments[i] === "r") state.region = parseInt(segments[i + 1], 10);
  }
  if (qs) {
    const query = new URLSearchParams(qs);
    const view = query.get("view");
    if (view === "regions" || view === "evolution" || view === "dag" || view === "attribution") {
      state.view = view;
    }
    const mode = query.get("mode");
    if (mode === "cluster" || mode === "latency") state.mode = mode;
    const start = query.get("start");
    if (start !== null && /^\d+$/.test(start)) state.start = parseInt(start, 10);
    const end = query.get("end");
    if (end !== null && /^\d+$/.test(end)) state.end = parseInt(end, 10);
    const folded = query.get("folded");
    if (folded) {
      state.folded = folded
        .split(".")
        .map((v) => parseInt(v, 10))
        .filter((v) => Number.isFinite(v));
    }
  }
  return state;
}

export function toggleFold(state: ViewState, nodeId: number): ViewState {
  const folded = state.folded.includes(nodeId)
    ? state.folded.filter((id) => id !== nodeId)
    : [...state.folded, nodeId];
  return { ...state, folded };
}
