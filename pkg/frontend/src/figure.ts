import { algorithmOrder } from "./group.js";
import { formatTick, logPos, logTicks, makeLogScale } from "./scale.js";
import type { LogScale } from "./scale.js";
import { clipSegment } from "./scene.js";
import type { MarkerShape, RGB, Scene, Shape } from "./scene.js";
import type { PanelData, Series } from "./types.js";

const PALETTE: RGB[] = [
  [31, 119, 180],
  [214, 39, 40],
  [44, 160, 44],
  [148, 103, 189],
  [140, 86, 75],
  [227, 119, 194],
];

const MARKERS: MarkerShape[] = ["circle", "square", "triangle", "diamond"];

const AXIS_COLOR: RGB = [60, 60, 60];
const GRID_COLOR: RGB = [222, 222, 222];
const TEXT_COLOR: RGB = [30, 30, 30];
const BG: RGB = [255, 255, 255];

export interface FigureOptions {
  width?: number;
  height?: number;
  title?: string;
}

export interface PanelAxes {
  noise: string;
  xDomain: [number, number];
  yDomain: [number, number];
}

export interface FigureModel {
  scene: Scene;
  axes: PanelAxes[];
}

export interface SeriesStyle {
  color: RGB;
  marker: MarkerShape;
}

export function styleFor(algorithm: string, order: string[]): SeriesStyle {
  const idx = Math.max(0, order.indexOf(algorithm));
  return {
    color: PALETTE[idx % PALETTE.length] as RGB,
    marker: MARKERS[idx % MARKERS.length] as MarkerShape,
  };
}

function padLog(lo: number, hi: number, frac: number): [number, number] {
  if (lo === hi) {
    return [lo / 2, hi * 2];
  }
  const a = Math.log10(lo);
  const b = Math.log10(hi);
  const pad = (b - a) * frac;
  return [Math.pow(10, a - pad), Math.pow(10, b + pad)];
}

function xExtent(panels: PanelData[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const panel of panels) {
    for (const series of panel.series) {
      for (const p of series.points) {
        lo = Math.min(lo, p.T);
        hi = Math.max(hi, p.T);
      }
    }
  }
  return padLog(lo, hi, 0.05);
}

function yExtent(panel: PanelData): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const series of panel.series) {
    for (const p of series.points) {
      const barLo = p.mean - p.stderr;
      lo = Math.min(lo, barLo > 0 ? barLo : p.mean);
      hi = Math.max(hi, p.mean + p.stderr);
    }
  }
  return padLog(lo, hi, 0.06);
}

interface PanelBox {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

function drawAxes(
  shapes: Shape[], box: PanelBox, xScale: LogScale, yScale: LogScale, noise: string,
): void {
  // grid behind everything else in this panel
  for (const tick of logTicks(yScale.min, yScale.max)) {
    const py = logPos(yScale, tick.value);
    if (tick.major) {
      shapes.push({ kind: "line", x1: box.x0, y1: py, x2: box.x1, y2: py, color: GRID_COLOR, width: 1 });
    }
  }
  for (const tick of logTicks(xScale.min, xScale.max)) {
    const px = logPos(xScale, tick.value);
    if (tick.major) {
      shapes.push({ kind: "line", x1: px, y1: box.y0, x2: px, y2: box.y1, color: GRID_COLOR, width: 1 });
    }
  }
  shapes.push({ kind: "rect", x: box.x0, y: box.y0, w: box.x1 - box.x0, h: box.y1 - box.y0, stroke: AXIS_COLOR });
  for (const tick of logTicks(xScale.min, xScale.max)) {
    const px = logPos(xScale, tick.value);
    const len = tick.major ? 5 : 3;
    shapes.push({ kind: "line", x1: px, y1: box.y1, x2: px, y2: box.y1 + len, color: AXIS_COLOR, width: 1 });
    if (tick.major) {
      shapes.push({
        kind: "text", x: px, y: box.y1 + 8, text: formatTick(tick.value),
        size: 10, color: TEXT_COLOR, anchor: "middle",
      });
    }
  }
  for (const tick of logTicks(yScale.min, yScale.max)) {
    const py = logPos(yScale, tick.value);
    const len = tick.major ? 5 : 3;
    shapes.push({ kind: "line", x1: box.x0 - len, y1: py, x2: box.x0, y2: py, color: AXIS_COLOR, width: 1 });
    if (tick.major) {
      shapes.push({
        kind: "text", x: box.x0 - 8, y: py - 5, text: formatTick(tick.value),
        size: 10, color: TEXT_COLOR, anchor: "end",
      });
    }
  }
  shapes.push({
    kind: "text", x: (box.x0 + box.x1) / 2, y: box.y0 - 18, text: noise,
    size: 12, color: TEXT_COLOR, anchor: "middle",
  });
  shapes.push({
    kind: "text", x: (box.x0 + box.x1) / 2, y: box.y1 + 24, text: "T",
    size: 10, color: TEXT_COLOR, anchor: "middle",
  });
}

function drawSeries(
  shapes: Shape[], box: PanelBox, xScale: LogScale, yScale: LogScale,
  series: Series, style: SeriesStyle,
): void {
  const pts = series.points.map((p) => ({
    px: logPos(xScale, p.T),
    py: logPos(yScale, p.mean),
    mean: p.mean,
    stderr: p.stderr,
  }));

  // dashed power-law overlay first so markers sit on top of it
  if (!Number.isNaN(series.alpha) && series.points.length >= 2) {
    const tLo = series.points[0]!.T;
    const tHi = series.points[series.points.length - 1]!.T;
    const yLo = series.cCoef * Math.pow(tLo, series.alpha);
    const yHi = series.cCoef * Math.pow(tHi, series.alpha);
    const seg = clipSegment(
      logPos(xScale, tLo), logPos(yScale, yLo),
      logPos(xScale, tHi), logPos(yScale, yHi),
      box.x0, box.y0, box.x1, box.y1,
    );
    if (seg) {
      shapes.push({
        kind: "line", x1: seg[0], y1: seg[1], x2: seg[2], y2: seg[3],
        color: style.color, width: 1, dash: [5, 4],
      });
    }
  }

  for (let i = 0; i + 1 < pts.length; i++) {
    const a = pts[i]!;
    const b = pts[i + 1]!;
    shapes.push({ kind: "line", x1: a.px, y1: a.py, x2: b.px, y2: b.py, color: style.color, width: 1 });
  }

  for (const p of pts) {
    if (p.stderr > 0) {
      const rawLo = p.mean - p.stderr;
      // a bar reaching 0 or below cannot be drawn on a log axis; clamp at the domain edge
      const lo = rawLo > yScale.min ? rawLo : yScale.min;
      const pyLo = logPos(yScale, lo);
      const pyHi = logPos(yScale, p.mean + p.stderr);
      shapes.push({ kind: "line", x1: p.px, y1: pyHi, x2: p.px, y2: pyLo, color: style.color, width: 1 });
      shapes.push({ kind: "line", x1: p.px - 3, y1: pyHi, x2: p.px + 3, y2: pyHi, color: style.color, width: 1 });
      shapes.push({ kind: "line", x1: p.px - 3, y1: pyLo, x2: p.px + 3, y2: pyLo, color: style.color, width: 1 });
    }
    shapes.push({ kind: "marker", shape: style.marker, x: p.px, y: p.py, size: 3.5, color: style.color });
  }
}

function drawLegend(shapes: Shape[], box: PanelBox, panel: PanelData, order: string[]): void {
  const rowH = 14;
  const x = box.x0 + 10;
  let y = box.y0 + 8;
  for (const series of panel.series) {
    const style = styleFor(series.algorithm, order);
    shapes.push({ kind: "marker", shape: style.marker, x: x + 4, y: y + 5, size: 3.5, color: style.color });
    const label = Number.isNaN(series.alpha)
      ? `${series.algorithm} (no fit)`
      : `${series.algorithm} a=${series.alpha.toFixed(2)}`;
    shapes.push({
      kind: "text", x: x + 12, y, text: label, size: 10, color: TEXT_COLOR, anchor: "start",
    });
    y += rowH;
  }
}

/** Lay out one log-log panel per noise model and return the drawable scene. */
export function buildFigure(panels: PanelData[], options: FigureOptions = {}): FigureModel {
  const width = options.width ?? 960;
  const height = options.height ?? 420;
  const title = options.title ?? "mean final pseudo-regret vs horizon";
  const margin = { left: 64, right: 16, top: 48, bottom: 44 };
  const gap = 52;
  const n = panels.length;
  const plotW = (width - margin.left - margin.right - gap * (n - 1)) / n;
  if (plotW < 80) {
    throw new Error(`too many panels (${n}) for a ${width}px figure`);
  }

  const order = algorithmOrder(panels);
  const [xLo, xHi] = xExtent(panels);
  const shapes: Shape[] = [];
  const axes: PanelAxes[] = [];

  shapes.push({
    kind: "text", x: width / 2, y: 10, text: title, size: 12, color: TEXT_COLOR, anchor: "middle",
  });

  panels.forEach((panel, i) => {
    const box: PanelBox = {
      x0: margin.left + i * (plotW + gap),
      y0: margin.top,
      x1: margin.left + i * (plotW + gap) + plotW,
      y1: height - margin.bottom,
    };
    const [yLo, yHi] = yExtent(panel);
    const xScale = makeLogScale(xLo, xHi, box.x0, box.x1);
    const yScale = makeLogScale(yLo, yHi, box.y1, box.y0);
    axes.push({ noise: panel.noise, xDomain: [xLo, xHi], yDomain: [yLo, yHi] });

    drawAxes(shapes, box, xScale, yScale, panel.noise);
    for (const series of panel.series) {
      drawSeries(shapes, box, xScale, yScale, series, styleFor(series.algorithm, order));
    }
    drawLegend(shapes, box, panel, order);
  });

  return { scene: { width, height, background: BG, shapes }, axes };
}
