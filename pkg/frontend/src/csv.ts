/**
 * Parser for the solver CLI's CSV dialect: a `# schema:` comment line, a
 * header row, and 12-significant-digit values with `true`/`false` booleans
 * and `nan` for missing numbers.
 */

export type CsvValue = number | boolean | string;

export interface CsvTable {
  schema: string;
  columns: string[];
  rows: Record<string, CsvValue>[];
}

const SCHEMA_PREFIX = "# schema: ";

function parseValue(raw: string): CsvValue {
  if (raw === "true") return true;
  if (raw === "false") return false;
  if (raw === "nan") return NaN;
  if (raw !== "" && !isNaN(Number(raw))) return Number(raw);
  return raw;
}

export function parseCsv(text: string): CsvTable {
  const lines = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (lines.length === 0 || !lines[0].startsWith(SCHEMA_PREFIX)) {
    throw new Error("missing '# schema:' comment line");
  }
  const schema = lines[0].slice(SCHEMA_PREFIX.length);
  if (lines.length < 2) {
    throw new Error("missing header row");
  }
  const columns = lines[1].split(",");
  const rows: Record<string, CsvValue>[] = [];
  for (const line of lines.slice(2)) {
    const parts = line.split(",");
    if (parts.length !== columns.length) {
      throw new Error(
        `row has ${parts.length} fields, expected ${columns.length}: ${line}`,
      );
    }
    const row: Record<string, CsvValue> = {};
    columns.forEach((col, i) => {
      row[col] = parseValue(parts[i]);
    });
    rows.push(row);
  }
  return { schema, columns, rows };
}

export function requireSchema(table: CsvTable, expected: string): void {
  if (table.schema !== expected) {
    throw new Error(
      `schema mismatch: expected '${expected}', file says '${table.schema}'`,
    );
  }
}

export function requireColumns(table: CsvTable, needed: string[]): void {
  for (const col of needed) {
    if (!table.columns.includes(col)) {
      throw new Error(`schema mismatch: missing column '${col}'`);
    }
  }
}
