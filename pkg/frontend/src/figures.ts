/** The five figure kinds, each mapping validated CSV tables onto a plot
 * spec.  Required input names and columns are part of the contract. */

import { readTable, numColumn, Table } from "./csv.js";
import { PlotSpec } from "./plot.js";

export type FigureKind =
  | "coupling-envelope"
  | "conservation"
  | "entropy"
  | "stability-sequence"
  | "oracle-ratios";

export const REQUIRED_INPUTS: Record<FigureKind, Record<string, string[]>> = {
  "coupling-envelope": {
    coupling: ["t", "rho_hat", "w2_est"],
    envelope: ["t", "envelope_c1"],
  },
  conservation: { trajectory: ["t", "px", "py", "pz", "energy"] },
  entropy: { trajectory: ["t", "entropy_est"] },
  "stability-sequence": { stability: ["shift", "w2_0", "sup_w2"] },
  "oracle-ratios": { ratios: ["name", "x", "ratio"] },
};

export function buildFigure(kind: FigureKind, inputs: Record<string, string>): PlotSpec {
  const tables: Record<string, Table> = {};
  for (const [name, required] of Object.entries(REQUIRED_INPUTS[kind])) {
    const path = inputs[name];
    if (!path) {
      throw new Error(`figure kind ${kind} needs an input named '${name}'`);
    }
    tables[name] = readTable(path, required);
  }
  switch (kind) {
    case "coupling-envelope": {
      const c = tables.coupling;
      const e = tables.envelope;
      const t = numColumn(c, "t");
      const w2 = numColumn(c, "w2_est");
      return {
        title: "coupling gap and envelope",
        xLabel: "t",
        yLabel: "squared gap",
        series: [
          { label: "rho_hat", x: t, y: numColumn(c, "rho_hat") },
          { label: "w2^2", x: t, y: w2.map((v) => v * v), marker: true, line: false },
          {
            label: "envelope (c=1)",
            x: numColumn(e, "t"),
            y: numColumn(e, "envelope_c1"),
            dash: [6, 4],
          },
        ],
      };
    }
    case "conservation": {
      const tr = tables.trajectory;
      const t = numColumn(tr, "t");
      const e = numColumn(tr, "energy");
      const e0 = e.find((v) => Number.isFinite(v)) ?? 0;
      return {
        title: "conservation drift",
        xLabel: "t",
        yLabel: "drift",
        series: [
          { label: "px", x: t, y: numColumn(tr, "px").map((v, i) => v - numColumn(tr, "px")[0]) },
          { label: "py", x: t, y: numColumn(tr, "py").map((v, i) => v - numColumn(tr, "py")[0]) },
          { label: "pz", x: t, y: numColumn(tr, "pz").map((v, i) => v - numColumn(tr, "pz")[0]) },
          { label: "energy - e0", x: t, y: e.map((v) => v - e0) },
        ],
      };
    }
    case "entropy": {
      const tr = tables.trajectory;
      return {
        title: "entropy functional",
        xLabel: "t",
        yLabel: "int f log f (estimate)",
        series: [
          { label: "entropy_est", x: numColumn(tr, "t"), y: numColumn(tr, "entropy_est") },
        ],
      };
    }
    case "stability-sequence": {
      const st = tables.stability;
      return {
        title: "stability sequence",
        xLabel: "initial w2",
        yLabel: "sup w2",
        xLog: true,
        yLog: true,
        series: [
          {
            label: "sup_t w2",
            x: numColumn(st, "w2_0"),
            y: numColumn(st, "sup_w2"),
            marker: true,
          },
        ],
      };
    }
    case "oracle-ratios": {
      const ra = tables.ratios;
      const byName = new Map<string, { x: number[]; y: number[] }>();
      ra.rows.forEach((row) => {
        const name = row.name;
        const x = Number(row.x);
        const y = Number(row.ratio);
        if (!Number.isFinite(x) || !Number.isFinite(y)) return;
        if (!byName.has(name)) byName.set(name, { x: [], y: [] });
        byName.get(name)!.x.push(x);
        byName.get(name)!.y.push(y);
      });
      const series = [...byName.entries()].map(([label, data]) => ({
        label,
        x: data.x,
        y: data.y,
        marker: true,
      }));
      if (series.length === 0) {
        throw new Error("oracle-ratios: no finite ratio rows in input");
      }
      return {
        title: "oracle ratios",
        xLabel: "sweep parameter",
        yLabel: "empirical ratio",
        xLog: true,
        series,
      };
    }
  }
}
