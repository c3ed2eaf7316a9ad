/**
 * Reader for the solver's CSV outputs.
 *
 * Files start with optional `# key=value` comment lines (run metadata),
 * then a header row, then numeric records.  Parsing is strict: a named
 * column that is missing raises SchemaError, an empty table raises
 * EmptyInputError.
 */

import * as fs from "node:fs";

export class SchemaError extends Error {}
export class EmptyInputError extends Error {}

export interface Table {
  path: string;
  meta: Record<string, string>;
  columns: string[];
  rows: number[][];
}

export function parseCsv(text: string, path = "<memory>"): Table {
  const meta: Record<string, string> = {};
  const lines = text.split(/\r?\n/);
  let header: string[] | null = null;
  const rows: number[][] = [];
  for (const raw of lines) {
    const line = raw.trim();
    if (line === "") continue;
    if (line.startsWith("#")) {
      const body = line.replace(/^#\s*/, "");
      const eq = body.indexOf("=");
      if (eq > 0) meta[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
      continue;
    }
    if (header === null) {
      header = line.split(",").map((s) => s.trim());
      continue;
    }
    const parts = line.split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(
        `${path}: row has ${parts.length} fields, header has ${header.length}`,
      );
    }
    rows.push(parts.map((s) => (s.trim() === "" ? NaN : Number(s))));
  }
  if (header === null) throw new EmptyInputError(`${path}: no header found`);
  if (rows.length === 0) throw new EmptyInputError(`${path}: no data rows`);
  return { path, meta, columns: header, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(fs.readFileSync(path, "utf8"), path);
}

/** Extract a named column; SchemaError names the missing column. */
export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `${table.path}: missing column '${name}' (have: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((r) => r[idx]);
}
