#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseFigureCsv } from "./csv.js";
import { MissingGroupError, SchemaMismatchError } from "./errors.js";
import { buildFigure } from "./figure.js";
import { groupPanels } from "./group.js";
import { encodePng } from "./png.js";
import { rasterize } from "./raster.js";
import { renderSvg } from "./svg.js";

export interface CliIo {
  out: (line: string) => void;
  err: (line: string) => void;
}

const USAGE = [
  "usage: pricing-lab-figures render --input <csv> [--out <path>] [--format svg|png] [--dry-run]",
  "",
  "  --input <csv>     figure-input CSV from the experiment harness report step",
  "  --out <path>      output image path (required unless --dry-run)",
  "  --format svg|png  output format; default inferred from --out extension, else svg",
  "  --dry-run         validate input and print figure config without writing anything",
].join("\n");

interface RenderArgs {
  input: string;
  out?: string;
  format?: "svg" | "png";
  dryRun: boolean;
}

function parseArgs(argv: string[]): RenderArgs | string {
  if (argv.length === 0 || argv[0] !== "render") {
    return argv[0] ? `unknown command: ${argv[0]}` : "missing command";
  }
  const args: RenderArgs = { input: "", dryRun: false };
  let i = 1;
  const next = (flag: string): string | null => {
    i += 1;
    const v = argv[i];
    if (v === undefined) {
      return null;
    }
    return v;
  };
  while (i < argv.length) {
    let arg = argv[i]!;
    let inlineValue: string | undefined;
    const eq = arg.indexOf("=");
    if (arg.startsWith("--") && eq > 0) {
      inlineValue = arg.slice(eq + 1);
      arg = arg.slice(0, eq);
    }
    const value = (flag: string): string | null =>
      inlineValue !== undefined ? inlineValue : next(flag);
    if (arg === "--input") {
      const v = value(arg);
      if (v === null) return "--input needs a value";
      args.input = v;
    } else if (arg === "--out") {
      const v = value(arg);
      if (v === null) return "--out needs a value";
      args.out = v;
    } else if (arg === "--format") {
      const v = value(arg);
      if (v !== "svg" && v !== "png") return `--format must be svg or png, got ${v ?? "nothing"}`;
      args.format = v;
    } else if (arg === "--dry-run") {
      if (inlineValue !== undefined) return "--dry-run takes no value";
      args.dryRun = true;
    } else {
      return `unknown option: ${arg}`;
    }
    i += 1;
  }
  if (args.input === "") {
    return "--input is required";
  }
  if (!args.dryRun && args.out === undefined) {
    return "--out is required unless --dry-run is given";
  }
  return args;
}

function pickFormat(args: RenderArgs): "svg" | "png" {
  if (args.format) {
    return args.format;
  }
  if (args.out && args.out.toLowerCase().endsWith(".png")) {
    return "png";
  }
  return "svg";
}

function fmtDomain(d: [number, number]): string {
  return `[${d[0].toPrecision(6)}, ${d[1].toPrecision(6)}]`;
}

export function main(argv: string[], io?: CliIo): number {
  const stdout = io?.out ?? ((line: string) => process.stdout.write(line + "\n"));
  const stderr = io?.err ?? ((line: string) => process.stderr.write(line + "\n"));

  const parsed = parseArgs(argv);
  if (typeof parsed === "string") {
    stderr(`error: ${parsed}`);
    stderr(USAGE);
    return 2;
  }

  let text: string;
  try {
    text = readFileSync(parsed.input, "utf8");
  } catch (e) {
    stderr(`error: cannot read ${parsed.input}: ${(e as Error).message}`);
    return 1;
  }

  try {
    const rows = parseFigureCsv(text);
    const panels = groupPanels(rows);
    const figure = buildFigure(panels);

    if (parsed.dryRun) {
      stdout(`input: ${parsed.input}`);
      stdout(`rows: ${rows.length}`);
      stdout(`panels: ${panels.map((p) => p.noise).join(", ")}`);
      const xd = figure.axes[0]!.xDomain;
      stdout(`x-axis: log10(T), domain ${fmtDomain(xd)}`);
      for (const ax of figure.axes) {
        stdout(`y-axis[${ax.noise}]: log10(mean_final_regret), domain ${fmtDomain(ax.yDomain)}`);
      }
      for (const panel of panels) {
        for (const series of panel.series) {
          const key = `${series.algorithm}/${panel.noise}`;
          if (Number.isNaN(series.alpha)) {
            stdout(`fit ${key}: none (nan in input)`);
          } else {
            stdout(`fit ${key}: alpha=${series.alpha.toFixed(2)} c_coef=${series.cCoef.toPrecision(4)}`);
          }
        }
      }
      return 0;
    }

    const format = pickFormat(parsed);
    const outPath = parsed.out!;
    if (format === "svg") {
      writeFileSync(outPath, renderSvg(figure.scene), "utf8");
    } else {
      writeFileSync(outPath, encodePng(rasterize(figure.scene)));
    }
    stdout(`wrote ${outPath} (${format}, ${figure.scene.width}x${figure.scene.height})`);
    return 0;
  } catch (e) {
    if (e instanceof SchemaMismatchError || e instanceof MissingGroupError) {
      stderr(`error: ${e.message}`);
      return 1;
    }
    throw e;
  }
}

const invokedDirectly =
  typeof process.argv[1] === "string" &&
  import.meta.url === pathToFileURL(process.argv[1]).href;

if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
