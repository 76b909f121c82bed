export { FIGURE_COLUMNS, parseFigureCsv } from "./csv.js";
export { MissingGroupError, SchemaMismatchError } from "./errors.js";
export { buildFigure, styleFor } from "./figure.js";
export type { FigureModel, FigureOptions, PanelAxes, SeriesStyle } from "./figure.js";
export { algorithmOrder, groupPanels } from "./group.js";
export { main } from "./cli.js";
export { encodePng } from "./png.js";
export { rasterize } from "./raster.js";
export type { Raster } from "./raster.js";
export { formatTick, logPos, logTicks, makeLogScale } from "./scale.js";
export { clipSegment } from "./scene.js";
export type { Scene, Shape, RGB } from "./scene.js";
export { renderSvg } from "./svg.js";
export type { FigureRow, PanelData, Series, SeriesPoint } from "./types.js";
