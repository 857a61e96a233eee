#!/usr/bin/env node
/**
 * lcl-plots render --spec spec.json [--spec more.json ...]
 *
 * Renders figures from simulator CSV outputs.  Exit 0 on success, 1 on any
 * validation or schema error (schema mismatches print the column diff on
 * stderr).
 */

import { SchemaError } from "./csv.js";
import { loadSpec, render } from "./spec.js";

export function main(argv: string[]): number {
  const args = argv.slice();
  const cmd = args.shift();
  if (cmd !== "render") {
    console.error(`usage: lcl-plots render --spec spec.json [--spec ...]`);
    return 1;
  }
  const specs: string[] = [];
  while (args.length > 0) {
    const flag = args.shift();
    if (flag === "--spec") {
      const value = args.shift();
      if (!value) {
        console.error("error: --spec needs a path");
        return 1;
      }
      specs.push(value);
    } else {
      console.error(`error: unknown argument ${flag}`);
      return 1;
    }
  }
  if (specs.length === 0) {
    console.error("error: at least one --spec is required");
    return 1;
  }
  for (const path of specs) {
    try {
      const out = render(loadSpec(path));
      console.log(out);
    } catch (e) {
      if (e instanceof SchemaError) {
        console.error(`error: ${e.message}`);
        console.error(`  missing: ${e.missing.join(", ")}`);
        console.error(`  found:   ${e.found.join(", ")}`);
      } else {
        console.error(`error: ${(e as Error).message}`);
      }
      return 1;
    }
  }
  return 0;
}

const isMain = process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (isMain) {
  process.exit(main(process.argv.slice(2)));
}
