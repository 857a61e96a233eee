/** Shared chart layout: margins, axes, ticks, grid, legend, line and
 * scatter series on linear or log scales. */

import { Scene, Primitive, PALETTE } from "./scene.js";
import { Scale, makeScale, formatTick, dataExtent } from "./scales.js";
import { textWidth } from "./font.js";

export interface Series {
  label: string;
  x: number[];
  y: number[];
  marker?: boolean;
  line?: boolean;
  dash?: number[];
  color?: string;
}

export interface PlotSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xLog?: boolean;
  yLog?: boolean;
  series: Series[];
}

const WIDTH = 860;
const HEIGHT = 520;
const MARGIN = { left: 78, right: 180, top: 48, bottom: 58 };

function padDomain([lo, hi]: [number, number], log: boolean): [number, number] {
  if (log) {
    return [lo / 1.3, hi * 1.3];
  }
  const span = hi - lo || 1;
  return [lo - 0.05 * span, hi + 0.05 * span];
}

export function renderPlot(spec: PlotSpec): Scene {
  const prims: Primitive[] = [];
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;

  const finite = (vals: number[]) => vals.filter((v) => Number.isFinite(v));
  let xsAll: number[] = [];
  let ysAll: number[] = [];
  for (const s of spec.series) {
    for (let i = 0; i < s.x.length; i++) {
      if (Number.isFinite(s.x[i]) && Number.isFinite(s.y[i])) {
        xsAll.push(s.x[i]);
        ysAll.push(s.y[i]);
      }
    }
  }
  // log axes silently fall back to linear when the data reaches <= 0
  // (an identically zero gap series must still render)
  const xLog = Boolean(spec.xLog) && xsAll.length > 0 && Math.min(...xsAll) > 0;
  const yLog = Boolean(spec.yLog) && ysAll.length > 0 && Math.min(...ysAll) > 0;
  const xScale = makeScale(padDomain(dataExtent(xsAll), xLog), [x0, x1], xLog);
  const yScale = makeScale(padDomain(dataExtent(ysAll), yLog), [y0, y1], yLog);

  // frame and grid
  for (const tx of xScale.ticks()) {
    const px = xScale.map(tx);
    prims.push({ kind: "polyline", points: [[px, y0], [px, y1]], color: "#e3e3e3", width: 1 });
    prims.push({ kind: "polyline", points: [[px, y0], [px, y0 + 5]], color: "#333333", width: 1 });
    prims.push({ kind: "text", x: px, y: y0 + 20, text: formatTick(tx), size: 11, color: "#333333", anchor: "middle" });
  }
  for (const ty of yScale.ticks()) {
    const py = yScale.map(ty);
    prims.push({ kind: "polyline", points: [[x0, py], [x1, py]], color: "#e3e3e3", width: 1 });
    prims.push({ kind: "polyline", points: [[x0 - 5, py], [x0, py]], color: "#333333", width: 1 });
    prims.push({ kind: "text", x: x0 - 8, y: py + 4, text: formatTick(ty), size: 11, color: "#333333", anchor: "end" });
  }
  prims.push({ kind: "rect", x: x0, y: y1, w: x1 - x0, h: y0 - y1, color: "#333333", fill: false });

  // series
  spec.series.forEach((s, idx) => {
    const color = s.color ?? PALETTE[idx % PALETTE.length];
    const pts: [number, number][] = [];
    for (let i = 0; i < s.x.length; i++) {
      if (!Number.isFinite(s.x[i]) || !Number.isFinite(s.y[i])) continue;
      if (xLog && s.x[i] <= 0) continue;
      if (yLog && s.y[i] <= 0) continue;
      pts.push([xScale.map(s.x[i]), yScale.map(s.y[i])]);
    }
    if (s.line !== false && pts.length > 1) {
      prims.push({ kind: "polyline", points: pts, color, width: 1.8, dash: s.dash });
    }
    if (s.marker) {
      for (const [px, py] of pts) {
        prims.push({ kind: "circle", x: px, y: py, r: 3.2, color, fill: true });
      }
    }
  });

  // legend
  let ly = y1 + 10;
  for (const [idx, s] of spec.series.entries()) {
    const color = s.color ?? PALETTE[idx % PALETTE.length];
    const lx = x1 + 14;
    if (s.line !== false) {
      prims.push({ kind: "polyline", points: [[lx, ly], [lx + 22, ly]], color, width: 2, dash: s.dash });
    }
    if (s.marker) {
      prims.push({ kind: "circle", x: lx + 11, y: ly, r: 3.2, color, fill: true });
    }
    prims.push({ kind: "text", x: lx + 28, y: ly + 4, text: s.label, size: 11, color: "#333333", anchor: "start" });
    ly += 18;
  }

  // labels
  prims.push({ kind: "text", x: (x0 + x1) / 2, y: 24, text: spec.title, size: 14, color: "#111111", anchor: "middle" });
  prims.push({ kind: "text", x: (x0 + x1) / 2, y: HEIGHT - 14, text: spec.xLabel, size: 12, color: "#333333", anchor: "middle" });
  const yl = spec.yLabel;
  prims.push({ kind: "text", x: x0 - 8 - textWidth(yl, 12) / 2, y: y1 - 10, text: yl, size: 12, color: "#333333", anchor: "start" });

  return { width: WIDTH, height: HEIGHT, background: "white", primitives: prims };
}
