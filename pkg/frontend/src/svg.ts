import type { RGB, Scene } from "./scene.js";

function f(v: number): string {
  return String(Math.round(v * 100) / 100);
}

function rgb(c: RGB): string {
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Serialize a scene to SVG. Text y in scene space is the top of the glyph
 * box; SVG wants a baseline, so shift by 0.8em. The font stack is monospace
 * to stay close to the PNG backend's fixed-width bitmap font.
 */
export function renderSvg(scene: Scene): string {
  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" ` +
    `viewBox="0 0 ${scene.width} ${scene.height}">`,
  );
  out.push(`<rect width="${scene.width}" height="${scene.height}" fill="${rgb(scene.background)}"/>`);
  for (const shape of scene.shapes) {
    switch (shape.kind) {
      case "line": {
        const dash = shape.dash ? ` stroke-dasharray="${shape.dash[0]} ${shape.dash[1]}"` : "";
        out.push(
          `<line x1="${f(shape.x1)}" y1="${f(shape.y1)}" x2="${f(shape.x2)}" y2="${f(shape.y2)}" ` +
          `stroke="${rgb(shape.color)}" stroke-width="${f(shape.width)}"${dash}/>`,
        );
        break;
      }
      case "rect": {
        const fill = shape.fill ? rgb(shape.fill) : "none";
        const stroke = shape.stroke ? ` stroke="${rgb(shape.stroke)}"` : "";
        out.push(
          `<rect x="${f(shape.x)}" y="${f(shape.y)}" width="${f(shape.w)}" height="${f(shape.h)}" ` +
          `fill="${fill}"${stroke}/>`,
        );
        break;
      }
      case "marker": {
        const c = rgb(shape.color);
        const { x, y, size: r } = shape;
        if (shape.shape === "circle") {
          out.push(`<circle cx="${f(x)}" cy="${f(y)}" r="${f(r)}" fill="${c}"/>`);
        } else if (shape.shape === "square") {
          out.push(
            `<rect x="${f(x - r)}" y="${f(y - r)}" width="${f(2 * r)}" height="${f(2 * r)}" fill="${c}"/>`,
          );
        } else if (shape.shape === "triangle") {
          const pts = `${f(x)},${f(y - r)} ${f(x - r)},${f(y + r)} ${f(x + r)},${f(y + r)}`;
          out.push(`<polygon points="${pts}" fill="${c}"/>`);
        } else {
          const pts = `${f(x)},${f(y - r)} ${f(x + r)},${f(y)} ${f(x)},${f(y + r)} ${f(x - r)},${f(y)}`;
          out.push(`<polygon points="${pts}" fill="${c}"/>`);
        }
        break;
      }
      case "text": {
        out.push(
          `<text x="${f(shape.x)}" y="${f(shape.y + shape.size * 0.8)}" ` +
          `font-family="monospace" font-size="${f(shape.size)}" fill="${rgb(shape.color)}" ` +
          `text-anchor="${shape.anchor}">${esc(shape.text)}</text>`,
        );
        break;
      }
    }
  }
  out.push("</svg>");
  return out.join("\n") + "\n";
}
