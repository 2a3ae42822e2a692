// Application shell: hash-routed state, fetch-and-render for the four views.

import { ApiClient, ApiError, latestOnly } from "./api.js";
import { renderScene } from "./render/svg.js";
import { decodeState, encodeState, toggleFold, ViewState } from "./state.js";
import { attributionView } from "./views/attributionView.js";
import { dagView } from "./views/dagView.js";
import { evolutionView } from "./views/evolutionView.js";
import { regionView } from "./views/regionView.js";

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

function currentState(): ViewState {
  return decodeState(window.location.hash);
}

function push(state: ViewState): void {
  window.location.hash = encodeState(state);
}

function defaultWindow(state: ViewState): { start: number; end: number } {
  return { start: state.start ?? 0, end: state.end ?? 1 };
}

const drawRegions = latestOnly(async (state: ViewState) => {
  const payload = await api.regions(state.session!);
  return { payload, state };
});

const drawEvolution = latestOnly(async (state: ViewState) => {
  const payload = await api.evolution(state.session!, state.region!);
  return { payload, state };
});

const drawDag = latestOnly(async (state: ViewState) => {
  const w = defaultWindow(state);
  const payload = await api.dag(state.session!, state.region!, w.start, w.end);
  return { payload, state };
});

const drawAttribution = latestOnly(async (state: ViewState) => {
  const w = defaultWindow(state);
  const payload = await api.attribution(state.session!, state.region!, w.start, w.end);
  return { payload, state };
});

function status(text: string): void {
  el("status").textContent = text;
}

async function render(): Promise<void> {
  const state = currentState();
  const host = el("view");
  for (const name of ["regions", "evolution", "dag", "attribution"]) {
    el(`tab-${name}`).classList.toggle("active", state.view === name);
  }
  if (!state.session) {
    status("create a session to begin");
    host.replaceChildren();
    return;
  }
  try {
    if (state.view === "regions") {
      const result = await drawRegions(state);
      if (!result) return;
      const svg = renderScene(
        regionView(result.payload, { mode: state.mode, selected: state.region }),
        host,
      );
      svg.addEventListener("click", (ev) => {
        const target = (ev.target as Element).closest("[data-role='process']");
        if (target) {
          push({ ...currentState(), region: Number(target.getAttribute("data-region")), view: "evolution" });
        }
      });
    } else if (state.view === "evolution") {
      const result = await drawEvolution(state);
      if (!result) return;
      const svg = renderScene(
        evolutionView(result.payload, { windowStart: state.start, windowEnd: state.end }),
        host,
      );
      svg.addEventListener("click", (ev) => {
        const target = (ev.target as Element).closest("[data-role='period']");
        if (target) {
          push({
            ...currentState(),
            start: Number(target.getAttribute("data-start")),
            end: Number(target.getAttribute("data-end")),
            view: "dag",
            folded: [],
          });
        }
      });
    } else if (state.view === "dag") {
      const result = await drawDag(state);
      if (!result) return;
      const svg = renderScene(dagView(result.payload, { folded: state.folded }), host);
      svg.addEventListener("dblclick", (ev) => {
        const target = (ev.target as Element).closest("[data-role='dag-node']");
        if (target) push(toggleFold(currentState(), Number(target.getAttribute("data-id"))));
      });
      svg.addEventListener("mouseover", (ev) => {
        const target = (ev.target as Element).closest("[data-role='dag-node']");
        if (!target) return;
        const id = target.getAttribute("data-id");
        svg.querySelectorAll("[data-role='dag-edge']").forEach((edge) => {
          const hit = edge.getAttribute("data-from") === id || edge.getAttribute("data-to") === id;
          (edge as SVGElement).style.strokeWidth = hit ? "3" : "";
        });
      });
    } else {
      const result = await drawAttribution(state);
      if (!result) return;
      renderScene(attributionView(result.payload), host);
    }
    status(`session ${state.session}` + (state.region !== null ? ` / region ${state.region}` : ""));
  } catch (error) {
    if (error instanceof ApiError) status(`error ${error.status}: ${error.message}`);
    else status(String(error));
  }
}

function wireChrome(): void {
  for (const name of ["regions", "evolution", "dag", "attribution"] as const) {
    el(`tab-${name}`).addEventListener("click", () => push({ ...currentState(), view: name }));
  }
  el("mode-toggle").addEventListener("click", () => {
    const state = currentState();
    push({ ...state, mode: state.mode === "cluster" ? "latency" : "cluster" });
  });
  el<HTMLFormElement>("session-form").addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const trace = el<HTMLInputElement>("trace-path").value.trim();
    const nodeMap = el<HTMLInputElement>("nodemap-path").value.trim();
    const configText = el<HTMLInputElement>("config-json").value.trim();
    try {
      const config = configText ? JSON.parse(configText) : {};
      const sid = await api.createSession({ trace, node_map: nodeMap, config });
      push({ ...currentState(), session: sid, region: null, view: "regions" });
    } catch (error) {
      status(String(error));
    }
  });
}

window.addEventListener("hashchange", render);
window.addEventListener("DOMContentLoaded", () => {
  wireChrome();
  void render();
});
