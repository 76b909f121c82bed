/** One row of the figure-input CSV produced by the experiment harness. */
export interface FigureRow {
  algorithm: string;
  noise: string;
  T: number;
  meanFinalRegret: number;
  stderr: number;
  /** Fitted exponent of the power-law overlay; NaN when the harness had no fit. */
  alpha: number;
  /** Fitted coefficient of the power-law overlay; NaN exactly when alpha is. */
  cCoef: number;
}

export interface SeriesPoint {
  T: number;
  mean: number;
  stderr: number;
}

/** All rows for one algorithm within one noise panel, plus its fit. */
export interface Series {
  algorithm: string;
  alpha: number;
  cCoef: number;
  points: SeriesPoint[];
}

export interface PanelData {
  noise: string;
  series: Series[];
}
