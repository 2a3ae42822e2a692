// Lightweight scene graph: views emit plain data, the SVG layer mounts it.
// Keeping marks as data makes every encoding directly assertable in tests.

export interface BaseMark {
  data?: Record<string, unknown>;   // hit-test payload (ids, roles)
  title?: string;                   // hover tooltip text
}

export interface CircleMark extends BaseMark {
  kind: "circle";
  x: number;
  y: number;
  r: number;
  fill: string;
  stroke?: string;
}

export interface EllipseMark extends BaseMark {
  kind: "ellipse";
  x: number;
  y: number;
  rx: number;
  ry: number;
  fill: string;
  stroke?: string;
}

export interface RectMark extends BaseMark {
  kind: "rect";
  x: number;
  y: number;
  width: number;
  height: number;
  fill: string;
}

export interface LineMark extends BaseMark {
  kind: "line";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  stroke: string;
  width?: number;
}

export interface PathMark extends BaseMark {
  kind: "path";
  d: string;
  stroke?: string;
  fill?: string;
  width?: number;
}

export interface TextMark extends BaseMark {
  kind: "text";
  x: number;
  y: number;
  text: string;
  size?: number;
  fill?: string;
  anchor?: "start" | "middle" | "end";
}

export type Mark = CircleMark | EllipseMark | RectMark | LineMark | PathMark | TextMark;

export interface Group {
  kind: "group";
  id?: string;
  children: (Mark | Group)[];
}

export interface Scene {
  width: number;
  height: number;
  root: Group;
}

export function group(children: (Mark | Group)[], id?: string): Group {
  return { kind: "group", id, children };
}

export function marks(scene: Scene, predicate?: (m: Mark) => boolean): Mark[] {
  const out: Mark[] = [];
  const walk = (g: Group) => {
    for (const child of g.children) {
      if (child.kind === "group") walk(child);
      else if (!predicate || predicate(child)) out.push(child);
    }
  };
  walk(scene.root);
  return out;
}

export function marksWithRole(scene: Scene, role: string): Mark[] {
  return marks(scene, (m) => m.data?.role === role);
}
