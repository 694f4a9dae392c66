/**
 * Readers for the delimited tables the experiment CLI emits.
 *
 * Every table carries a header row and a config_hash column binding it to
 * the resolved config; readers validate both before any rendering happens.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

export interface Table {
  columns: string[];
  rows: string[][];
  configHash: string;
}

export function readTable(path: string, requiredColumns: string[]): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new SchemaError(`cannot read table ${path}: ${(err as Error).message}`);
  }
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length < 1) {
    throw new SchemaError(`${path} is empty`);
  }
  const columns = lines[0].split(",");
  for (const col of requiredColumns) {
    if (!columns.includes(col)) {
      throw new SchemaError(`${path} is missing required column '${col}'`);
    }
  }
  const rows = lines.slice(1).map((line) => line.split(","));
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new SchemaError(`${path} has a ragged row (${row.length} of ${columns.length} cells)`);
    }
  }
  if (rows.length === 0) {
    throw new SchemaError(`${path} has a header but no rows`);
  }
  const hashIndex = columns.indexOf("config_hash");
  if (hashIndex < 0) {
    throw new SchemaError(`${path} is missing the config_hash column`);
  }
  const configHash = rows[0][hashIndex];
  for (const row of rows) {
    if (row[hashIndex] !== configHash) {
      throw new SchemaError(`${path} mixes config hashes (${row[hashIndex]} vs ${configHash})`);
    }
  }
  return { columns, rows, configHash };
}

export function numberColumn(table: Table, name: string, path = "table"): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`${path} is missing column '${name}'`);
  }
  return table.rows.map((row, i) => {
    const value = Number(row[idx]);
    if (row[idx] === "" || Number.isNaN(value)) {
      throw new SchemaError(`${path} row ${i + 1}: column '${name}' is not numeric: '${row[idx]}'`);
    }
    return value;
  });
}

/** Column that may contain empty cells (e.g. the step-0 action). */
export function optionalNumberColumn(table: Table, name: string): (number | null)[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`table is missing column '${name}'`);
  }
  return table.rows.map((row) => (row[idx] === "" ? null : Number(row[idx])));
}

export function assertSameHash(tables: Table[], context: string): string {
  const hashes = new Set(tables.map((t) => t.configHash));
  if (hashes.size !== 1) {
    throw new SchemaError(`${context}: tables carry different config hashes: ${[...hashes].join(", ")}`);
  }
  return tables[0].configHash;
}
