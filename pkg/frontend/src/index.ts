export { render, loadSpec, parseSpec } from "./spec.js";
export type { FigureSpec } from "./spec.js";
export { buildFigure, REQUIRED_INPUTS } from "./figures.js";
export type { FigureKind } from "./figures.js";
export { parseCsv, readTable, SchemaError } from "./csv.js";
export { renderPlot } from "./plot.js";
export { sceneToSvg } from "./svg.js";
export { sceneToRgba } from "./raster.js";
export { encodePng } from "./png.js";
export { main } from "./cli.js";
