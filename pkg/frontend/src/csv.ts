/**
 * Minimal RFC-4180 CSV reader for the simulator's outputs: comma separated,
 * CRLF or LF line ends, double-quote escaping, first row is the header.
 * Empty fields stay empty strings (the simulator writes missing reals that
 * way); `num` converts on demand and maps empties to NaN.
 */

import { readFileSync } from "fs";

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export class SchemaError extends Error {
  readonly missing: string[];
  readonly found: string[];

  constructor(path: string, missing: string[], found: string[]) {
    super(
      `schema mismatch in ${path}: missing columns [${missing.join(", ")}], ` +
        `found [${found.join(", ")}]`
    );
    this.missing = missing;
    this.found = found;
  }
}

export function parseCsv(text: string): Table {
  const records: string[][] = [];
  let field = "";
  let record: string[] = [];
  let inQuotes = false;
  for (let i = 0; i < text.length; i++) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        field += ch;
      }
    } else if (ch === '"') {
      inQuotes = true;
    } else if (ch === ",") {
      record.push(field);
      field = "";
    } else if (ch === "\n" || ch === "\r") {
      if (ch === "\r" && text[i + 1] === "\n") i++;
      record.push(field);
      field = "";
      records.push(record);
      record = [];
    } else {
      field += ch;
    }
  }
  if (field.length > 0 || record.length > 0) {
    record.push(field);
    records.push(record);
  }
  const nonEmpty = records.filter((r) => !(r.length === 1 && r[0] === ""));
  if (nonEmpty.length === 0) {
    return { columns: [], rows: [] };
  }
  const columns = nonEmpty[0];
  const rows = nonEmpty.slice(1).map((rec) => {
    const row: Record<string, string> = {};
    columns.forEach((c, k) => {
      row[c] = rec[k] ?? "";
    });
    return row;
  });
  return { columns, rows };
}

export function readTable(path: string, required: string[]): Table {
  const table = parseCsv(readFileSync(path, "utf8"));
  const missing = required.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(path, missing, table.columns);
  }
  return table;
}

export function num(row: Record<string, string>, column: string): number {
  const raw = row[column];
  if (raw === undefined || raw === "") return NaN;
  return Number(raw);
}

export function numColumn(table: Table, column: string): number[] {
  return table.rows.map((r) => num(r, column));
}
