/** FigureSpec parsing and the render entry point. */

import { readFileSync, writeFileSync, mkdirSync } from "fs";
import { dirname } from "path";

import { FigureKind, REQUIRED_INPUTS, buildFigure } from "./figures.js";
import { renderPlot } from "./plot.js";
import { sceneToSvg } from "./svg.js";
import { sceneToRgba } from "./raster.js";
import { encodePng } from "./png.js";

export interface FigureSpec {
  kind: FigureKind;
  inputs: Record<string, string>;
  output: string;
  format: "png" | "svg";
}

export function parseSpec(raw: unknown): FigureSpec {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error("figure spec must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  const kind = obj.kind;
  if (typeof kind !== "string" || !(kind in REQUIRED_INPUTS)) {
    throw new Error(
      `unknown figure kind ${JSON.stringify(kind)}; expected one of ` +
        Object.keys(REQUIRED_INPUTS).join(", ")
    );
  }
  const format = obj.format ?? "svg";
  if (format !== "png" && format !== "svg") {
    throw new Error(`format must be "png" or "svg", got ${JSON.stringify(format)}`);
  }
  if (typeof obj.output !== "string" || obj.output.length === 0) {
    throw new Error("figure spec needs a non-empty 'output' path");
  }
  const inputs = obj.inputs;
  if (typeof inputs !== "object" || inputs === null) {
    throw new Error("figure spec needs an 'inputs' object of CSV paths");
  }
  for (const [k, v] of Object.entries(inputs)) {
    if (typeof v !== "string") {
      throw new Error(`input '${k}' must be a path string`);
    }
  }
  const allowed = Object.keys(REQUIRED_INPUTS[kind as FigureKind]);
  for (const k of Object.keys(inputs)) {
    if (!allowed.includes(k)) {
      throw new Error(
        `input '${k}' is not used by ${kind}; expected inputs: ${allowed.join(", ")}`
      );
    }
  }
  return {
    kind: kind as FigureKind,
    inputs: inputs as Record<string, string>,
    output: obj.output,
    format,
  };
}

export function loadSpec(path: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf8"));
  } catch (e) {
    throw new Error(`cannot read figure spec ${path}: ${(e as Error).message}`);
  }
  return parseSpec(raw);
}

/** Renders the figure described by the spec and writes it; returns the
 * output path.  Read-only over its inputs; no timestamps embedded. */
export function render(spec: FigureSpec): string {
  const plot = buildFigure(spec.kind, spec.inputs);
  const scene = renderPlot(plot);
  mkdirSync(dirname(spec.output) || ".", { recursive: true });
  if (spec.format === "svg") {
    writeFileSync(spec.output, sceneToSvg(scene));
  } else {
    writeFileSync(spec.output, encodePng(scene.width, scene.height, sceneToRgba(scene)));
  }
  return spec.output;
}
