// Scene graph -> SVG DOM. Browser-only; everything testable lives upstream.

import { Group, Mark, Scene } from "../scene.js";

const NS = "http://www.w3.org/2000/svg";

function setData(el: Element, data?: Record<string, unknown>) {
  if (!data) return;
  for (const [key, value] of Object.entries(data)) {
    if (value === null || value === undefined) continue;
    if (typeof value === "object") continue;
    el.setAttribute(`data-${key.replace(/_/g, "-")}`, String(value));
  }
}

function markToElement(mark: Mark): Element {
  let el: Element;
  switch (mark.kind) {
    case "circle":
      el = document.createElementNS(NS, "circle");
      el.setAttribute("cx", String(mark.x));
      el.setAttribute("cy", String(mark.y));
      el.setAttribute("r", String(mark.r));
      el.setAttribute("fill", mark.fill);
      if (mark.stroke) el.setAttribute("stroke", mark.stroke);
      break;
    case "ellipse":
      el = document.createElementNS(NS, "ellipse");
      el.setAttribute("cx", String(mark.x));
      el.setAttribute("cy", String(mark.y));
      el.setAttribute("rx", String(mark.rx));
      el.setAttribute("ry", String(mark.ry));
      el.setAttribute("fill", mark.fill);
      if (mark.stroke) el.setAttribute("stroke", mark.stroke);
      break;
    case "rect":
      el = document.createElementNS(NS, "rect");
      el.setAttribute("x", String(mark.x));
      el.setAttribute("y", String(mark.y));
      el.setAttribute("width", String(mark.width));
      el.setAttribute("height", String(mark.height));
      el.setAttribute("fill", mark.fill);
      break;
    case "line":
      el = document.createElementNS(NS, "line");
      el.setAttribute("x1", String(mark.x1));
      el.setAttribute("y1", String(mark.y1));
      el.setAttribute("x2", String(mark.x2));
      el.setAttribute("y2", String(mark.y2));
      el.setAttribute("stroke", mark.stroke);
      el.setAttribute("stroke-width", String(mark.width ?? 1));
      break;
    case "path":
      el = document.createElementNS(NS, "path");
      el.setAttribute("d", mark.d);
      el.setAttribute("fill", mark.fill ?? "none");
      if (mark.stroke) el.setAttribute("stroke", mark.stroke);
      el.setAttribute("stroke-width", String(mark.width ?? 1));
      break;
    case "text":
      el = document.createElementNS(NS, "text");
      el.setAttribute("x", String(mark.x));
      el.setAttribute("y", String(mark.y));
      el.setAttribute("font-size", String(mark.size ?? 12));
      el.setAttribute("fill", mark.fill ?? "#000");
      if (mark.anchor) el.setAttribute("text-anchor", mark.anchor);
      el.textContent = mark.text;
      break;
  }
  setData(el, mark.data);
  if (mark.title) {
    const title = document.createElementNS(NS, "title");
    title.textContent = mark.title;
    el.appendChild(title);
  }
  return el;
}

function groupToElement(g: Group): Element {
  const el = document.createElementNS(NS, "g");
  if (g.id) el.setAttribute("data-layer", g.id);
  for (const child of g.children) {
    el.appendChild(child.kind === "group" ? groupToElement(child) : markToElement(child));
  }
  return el;
}

export function renderScene(scene: Scene, host: HTMLElement): SVGSVGElement {
  const svg = document.createElementNS(NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${scene.width} ${scene.height}`);
  svg.setAttribute("width", "100%");
  svg.appendChild(groupToElement(scene.root));
  host.replaceChildren(svg);
  return svg;
}
