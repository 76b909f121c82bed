/** Log10 scale mapping a positive domain onto a pixel interval. */
export interface LogScale {
  min: number;
  max: number;
  px0: number;
  px1: number;
}

export function makeLogScale(min: number, max: number, px0: number, px1: number): LogScale {
  if (!(min > 0) || !(max > min)) {
    throw new Error(`log scale needs 0 < min < max, got [${min}, ${max}]`);
  }
  return { min, max, px0, px1 };
}

export function logPos(scale: LogScale, v: number): number {
  const t = (Math.log10(v) - Math.log10(scale.min)) / (Math.log10(scale.max) - Math.log10(scale.min));
  return scale.px0 + t * (scale.px1 - scale.px0);
}

export interface Tick {
  value: number;
  /** Major ticks get labels and grid lines, minors just a short stroke. */
  major: boolean;
}

/**
 * Decade ticks (1e2, 1e3, ...) within [min, max], plus 2x and 5x minors.
 * When fewer than two decades fall inside the range the minors are promoted
 * to majors, and a range too narrow even for that falls back to every
 * mantissa 1..9 so the axis always has at least two labeled ticks.
 */
export function logTicks(min: number, max: number): Tick[] {
  const collect = (mantissas: number[]): Tick[] => {
    const ticks: Tick[] = [];
    const kLo = Math.floor(Math.log10(min)) - 1;
    const kHi = Math.ceil(Math.log10(max)) + 1;
    const eps = 1e-9;
    for (let k = kLo; k <= kHi; k++) {
      for (const m of mantissas) {
        const v = m * Math.pow(10, k);
        if (v >= min * (1 - eps) && v <= max * (1 + eps)) {
          ticks.push({ value: v, major: m === 1 });
        }
      }
    }
    return ticks;
  };

  let ticks = collect([1, 2, 5]);
  if (ticks.length < 2) {
    ticks = collect([1, 2, 3, 4, 5, 6, 7, 8, 9]);
  }
  const majors = ticks.filter((t) => t.major).length;
  if (majors < 2) {
    for (const t of ticks) {
      t.major = true;
    }
  }
  return ticks;
}

/** Compact tick label: 1000 -> "1e3", 2000 -> "2e3", 50 -> "50". */
export function formatTick(v: number): string {
  const k = Math.floor(Math.log10(v) + 1e-9);
  const m = v / Math.pow(10, k);
  const mr = Math.round(m * 100) / 100;
  if (k >= 3 || k <= -3) {
    return `${mr}e${k}`;
  }
  return v >= 1 ? String(Math.round(v * 1e6) / 1e6) : v.toPrecision(2);
}
