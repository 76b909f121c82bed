import { SchemaMismatchError } from "./errors.js";
import type { FigureRow } from "./types.js";

export const FIGURE_COLUMNS = [
  "algorithm",
  "noise",
  "T",
  "mean_final_regret",
  "stderr",
  "alpha",
  "c_coef",
] as const;

const EXPECTED_HEADER = FIGURE_COLUMNS.join(",");

// Number() is too forgiving ("" -> 0, "0x10" -> 16), so gate on a regex first.
const FLOAT_RE = /^[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?$/;
const INT_RE = /^\d+$/;

function parseFloatStrict(field: string, raw: string, line: number): number {
  if (!FLOAT_RE.test(raw)) {
    throw new SchemaMismatchError(`line ${line}: ${field} is not a number: "${raw}"`);
  }
  return Number(raw);
}

/** Like parseFloatStrict but also accepts the literal "nan" the harness writes. */
function parseFitValue(field: string, raw: string, line: number): number {
  if (raw === "nan") {
    return NaN;
  }
  return parseFloatStrict(field, raw, line);
}

/**
 * Parse a figure-input CSV. The format is strict: the header must match
 * FIGURE_COLUMNS exactly and every row must have seven well-typed fields.
 * Fields never contain commas or quotes, so a plain split is safe.
 */
export function parseFigureCsv(text: string): FigureRow[] {
  const lines = text.split(/\r?\n/);
  // allow a single trailing newline
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new SchemaMismatchError("empty file, expected a figure-input CSV");
  }
  if (lines[0] !== EXPECTED_HEADER) {
    throw new SchemaMismatchError(
      `bad header: expected "${EXPECTED_HEADER}", got "${lines[0]}"`,
    );
  }

  const rows: FigureRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const lineNo = i + 1;
    const raw = lines[i];
    if (raw === undefined || raw === "") {
      throw new SchemaMismatchError(`line ${lineNo}: blank line inside data`);
    }
    const parts = raw.split(",");
    if (parts.length !== FIGURE_COLUMNS.length) {
      throw new SchemaMismatchError(
        `line ${lineNo}: expected ${FIGURE_COLUMNS.length} fields, got ${parts.length}`,
      );
    }
    const [algorithm, noise, tRaw, meanRaw, stderrRaw, alphaRaw, cRaw] = parts as [
      string, string, string, string, string, string, string,
    ];
    if (algorithm === "" || noise === "") {
      throw new SchemaMismatchError(`line ${lineNo}: empty algorithm or noise`);
    }
    if (!INT_RE.test(tRaw)) {
      throw new SchemaMismatchError(`line ${lineNo}: T is not a positive integer: "${tRaw}"`);
    }
    const T = Number(tRaw);
    if (T <= 0 || !Number.isSafeInteger(T)) {
      throw new SchemaMismatchError(`line ${lineNo}: T out of range: "${tRaw}"`);
    }
    const meanFinalRegret = parseFloatStrict("mean_final_regret", meanRaw, lineNo);
    if (!(meanFinalRegret > 0) || !Number.isFinite(meanFinalRegret)) {
      // log-scale axis; zero-regret series (exact oracles) have no place here
      throw new SchemaMismatchError(
        `line ${lineNo}: mean_final_regret must be positive and finite, got "${meanRaw}"`,
      );
    }
    const stderr = parseFloatStrict("stderr", stderrRaw, lineNo);
    if (stderr < 0 || !Number.isFinite(stderr)) {
      throw new SchemaMismatchError(`line ${lineNo}: stderr must be >= 0, got "${stderrRaw}"`);
    }
    const alpha = parseFitValue("alpha", alphaRaw, lineNo);
    const cCoef = parseFitValue("c_coef", cRaw, lineNo);
    if (Number.isNaN(alpha) !== Number.isNaN(cCoef)) {
      throw new SchemaMismatchError(
        `line ${lineNo}: alpha and c_coef must both be numbers or both nan`,
      );
    }
    if (!Number.isNaN(cCoef) && cCoef <= 0) {
      throw new SchemaMismatchError(`line ${lineNo}: c_coef must be positive, got "${cRaw}"`);
    }
    rows.push({ algorithm, noise, T, meanFinalRegret, stderr, alpha, cCoef });
  }
  return rows;
}
