/** Resolution-independent drawing primitives shared by the SVG and PNG backends. */

export type RGB = [number, number, number];

export type MarkerShape = "circle" | "square" | "triangle" | "diamond";

export interface LineShape {
  kind: "line";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  color: RGB;
  width: number;
  /** on/off pixel lengths; omitted means solid */
  dash?: [number, number];
}

export interface RectShape {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  fill?: RGB;
  stroke?: RGB;
}

export interface MarkerShapeNode {
  kind: "marker";
  shape: MarkerShape;
  x: number;
  y: number;
  /** radius in pixels */
  size: number;
  color: RGB;
}

export interface TextShape {
  kind: "text";
  x: number;
  y: number;
  text: string;
  /** glyph height in pixels */
  size: number;
  color: RGB;
  anchor: "start" | "middle" | "end";
}

export type Shape = LineShape | RectShape | MarkerShapeNode | TextShape;

export interface Scene {
  width: number;
  height: number;
  background: RGB;
  shapes: Shape[];
}

/**
 * Clip the segment (x1,y1)-(x2,y2) to an axis-aligned box, Liang-Barsky style.
 * Returns null when the segment misses the box entirely.
 */
export function clipSegment(
  x1: number, y1: number, x2: number, y2: number,
  xLo: number, yLo: number, xHi: number, yHi: number,
): [number, number, number, number] | null {
  const dx = x2 - x1;
  const dy = y2 - y1;
  let t0 = 0;
  let t1 = 1;
  const edges: Array<[number, number]> = [
    [-dx, x1 - xLo],
    [dx, xHi - x1],
    [-dy, y1 - yLo],
    [dy, yHi - y1],
  ];
  for (const [p, q] of edges) {
    if (p === 0) {
      if (q < 0) {
        return null;
      }
      continue;
    }
    const r = q / p;
    if (p < 0) {
      if (r > t1) return null;
      if (r > t0) t0 = r;
    } else {
      if (r < t0) return null;
      if (r < t1) t1 = r;
    }
  }
  return [x1 + t0 * dx, y1 + t0 * dy, x1 + t1 * dx, y1 + t1 * dy];
}
