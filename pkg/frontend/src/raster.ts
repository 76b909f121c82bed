import { ADVANCE, GLYPH_H, GLYPH_W, glyphRows, textWidth } from "./font.js";
import type { RGB, Scene, Shape } from "./scene.js";

/** Plain RGB pixel buffer, row-major, 3 bytes per pixel. */
export interface Raster {
  width: number;
  height: number;
  data: Uint8Array;
}

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: RGB) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3);
    for (let i = 0; i < width * height; i++) {
      this.data[i * 3] = background[0];
      this.data[i * 3 + 1] = background[1];
      this.data[i * 3 + 2] = background[2];
    }
  }

  set(x: number, y: number, c: RGB): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) {
      return;
    }
    const i = (y * this.width + x) * 3;
    this.data[i] = c[0];
    this.data[i + 1] = c[1];
    this.data[i + 2] = c[2];
  }

  /** Stamp a w-by-w block centered on (x, y); w=1 is a single pixel. */
  private stamp(x: number, y: number, w: number, c: RGB): void {
    if (w <= 1) {
      this.set(x, y, c);
      return;
    }
    const half = Math.floor(w / 2);
    for (let dy = -half; dy < w - half; dy++) {
      for (let dx = -half; dx < w - half; dx++) {
        this.set(x + dx, y + dy, c);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, c: RGB, width: number, dash?: [number, number]): void {
    const dx = x2 - x1;
    const dy = y2 - y1;
    const steps = Math.max(1, Math.ceil(Math.max(Math.abs(dx), Math.abs(dy))));
    const w = Math.max(1, Math.round(width));
    const period = dash ? dash[0] + dash[1] : 0;
    const segLen = Math.hypot(dx, dy);
    for (let s = 0; s <= steps; s++) {
      const t = s / steps;
      if (dash && period > 0) {
        const dist = t * segLen;
        if (dist % period >= dash[0]) {
          continue;
        }
      }
      this.stamp(Math.round(x1 + t * dx), Math.round(y1 + t * dy), w, c);
    }
  }

  rect(x: number, y: number, w: number, h: number, fill?: RGB, stroke?: RGB): void {
    const x0 = Math.round(x);
    const y0 = Math.round(y);
    const x1 = Math.round(x + w);
    const y1 = Math.round(y + h);
    if (fill) {
      for (let py = y0; py < y1; py++) {
        for (let px = x0; px < x1; px++) {
          this.set(px, py, fill);
        }
      }
    }
    if (stroke) {
      this.line(x0, y0, x1, y0, stroke, 1);
      this.line(x1, y0, x1, y1, stroke, 1);
      this.line(x1, y1, x0, y1, stroke, 1);
      this.line(x0, y1, x0, y0, stroke, 1);
    }
  }

  marker(shape: "circle" | "square" | "triangle" | "diamond", cx: number, cy: number, r: number, c: RGB): void {
    const lo = Math.floor(-r - 1);
    const hi = Math.ceil(r + 1);
    for (let dy = lo; dy <= hi; dy++) {
      for (let dx = lo; dx <= hi; dx++) {
        const px = Math.round(cx) + dx;
        const py = Math.round(cy) + dy;
        let inside = false;
        if (shape === "circle") {
          inside = dx * dx + dy * dy <= r * r;
        } else if (shape === "square") {
          inside = Math.abs(dx) <= r && Math.abs(dy) <= r;
        } else if (shape === "diamond") {
          inside = Math.abs(dx) + Math.abs(dy) <= r;
        } else {
          // triangle with apex up: inside when below the two slanted edges
          inside = dy >= -r && dy <= r && Math.abs(dx) <= ((dy + r) / (2 * r)) * r;
        }
        if (inside) {
          this.set(px, py, c);
        }
      }
    }
  }

  text(x: number, y: number, s: string, size: number, c: RGB, anchor: "start" | "middle" | "end"): void {
    const scale = Math.max(1, Math.round(size / GLYPH_H));
    const w = textWidth(s, scale);
    let px = Math.round(anchor === "start" ? x : anchor === "middle" ? x - w / 2 : x - w);
    const py = Math.round(y);
    for (const ch of s) {
      const rows = glyphRows(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        const bits = rows[gy] ?? 0;
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if ((bits >> (GLYPH_W - 1 - gx)) & 1) {
            for (let sy = 0; sy < scale; sy++) {
              for (let sx = 0; sx < scale; sx++) {
                this.set(px + gx * scale + sx, py + gy * scale + sy, c);
              }
            }
          }
        }
      }
      px += ADVANCE * scale;
    }
  }
}

export function rasterize(scene: Scene): Raster {
  const canvas = new Canvas(scene.width, scene.height, scene.background);
  for (const shape of scene.shapes) {
    drawShape(canvas, shape);
  }
  return { width: canvas.width, height: canvas.height, data: canvas.data };
}

function drawShape(canvas: Canvas, shape: Shape): void {
  switch (shape.kind) {
    case "line":
      canvas.line(shape.x1, shape.y1, shape.x2, shape.y2, shape.color, shape.width, shape.dash);
      break;
    case "rect":
      canvas.rect(shape.x, shape.y, shape.w, shape.h, shape.fill, shape.stroke);
      break;
    case "marker":
      canvas.marker(shape.shape, shape.x, shape.y, shape.size, shape.color);
      break;
    case "text":
      canvas.text(shape.x, shape.y, shape.text, shape.size, shape.color, shape.anchor);
      break;
  }
}
