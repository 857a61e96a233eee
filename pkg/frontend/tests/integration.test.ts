/** End-to-end: render every figure kind from real simulator outputs
 * (CSV fixtures produced by the lcl CLI and checked in under tests/data). */

import { describe, expect, it } from "vitest";
import { existsSync, readFileSync } from "fs";
import { join, dirname } from "path";
import { fileURLToPath } from "url";

import { render, parseSpec } from "../src/spec.js";
import { tempDir } from "./fixtures.js";

const DATA = join(dirname(fileURLToPath(import.meta.url)), "data");

const KINDS: [string, Record<string, string>][] = [
  [
    "coupling-envelope",
    { coupling: join(DATA, "coupling.csv"), envelope: join(DATA, "envelope.csv") },
  ],
  ["conservation", { trajectory: join(DATA, "trajectory.csv") }],
  ["entropy", { trajectory: join(DATA, "trajectory.csv") }],
  ["stability-sequence", { stability: join(DATA, "stability.csv") }],
  ["oracle-ratios", { ratios: join(DATA, "oracle_ratios.csv") }],
];

describe("rendering real simulator outputs", () => {
  it("all five figure kinds render in both formats", () => {
    const out = tempDir();
    for (const [kind, inputs] of KINDS) {
      for (const format of ["svg", "png"] as const) {
        const spec = parseSpec({
          kind,
          inputs,
          output: join(out, `${kind}.${format}`),
          format,
        });
        const path = render(spec);
        expect(existsSync(path)).toBe(true);
        const buf = readFileSync(path);
        expect(buf.length).toBeGreaterThan(500);
      }
    }
  });

  it("coupling figure reflects the exact initial translation gap", () => {
    const text = readFileSync(join(DATA, "coupling.csv"), "utf8");
    const firstData = text.split("\r\n")[1].split(",");
    // column 8 is rho_hat; the run used shift 0.1, so rho(0) = 0.01
    expect(Number(firstData[8])).toBeCloseTo(0.01, 12);
  });
});
