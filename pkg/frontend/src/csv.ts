/**
 * RFC 4180 CSV reading and harness-schema validation.
 */

export class SchemaError extends Error {
  readonly column: string;

  constructor(message: string, column: string) {
    super(message);
    this.name = "SchemaError";
    this.column = column;
  }
}

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

/** Parse CSV text into raw cells (handles quoted fields, CRLF and LF). */
export function parseCsv(text: string): string[][] {
  const records: string[][] = [];
  let field = "";
  let record: string[] = [];
  let inQuotes = false;
  let i = 0;
  const push = () => {
    record.push(field);
    field = "";
  };
  const endRecord = () => {
    push();
    records.push(record);
    record = [];
  };
  while (i < text.length) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
      continue;
    }
    if (ch === '"') {
      inQuotes = true;
      i += 1;
    } else if (ch === ",") {
      push();
      i += 1;
    } else if (ch === "\r" && text[i + 1] === "\n") {
      endRecord();
      i += 2;
    } else if (ch === "\n") {
      endRecord();
      i += 1;
    } else {
      field += ch;
      i += 1;
    }
  }
  if (field.length > 0 || record.length > 0) {
    endRecord();
  }
  return records.filter((r) => !(r.length === 1 && r[0] === ""));
}

export function readTable(text: string): Table {
  const records = parseCsv(text);
  if (records.length === 0) {
    throw new SchemaError("CSV has no header row", "");
  }
  const columns = records[0];
  const rows = records.slice(1).map((cells) => {
    const row: Record<string, string> = {};
    columns.forEach((name, idx) => {
      row[name] = cells[idx] ?? "";
    });
    return row;
  });
  return { columns, rows };
}

/** Columns must match the harness schema exactly, in order. */
export function requireColumns(table: Table, expected: string[]): void {
  const n = Math.max(table.columns.length, expected.length);
  for (let i = 0; i < n; i += 1) {
    const want = expected[i];
    const got = table.columns[i];
    if (want !== got) {
      const offender = got ?? want ?? "";
      throw new SchemaError(
        `column ${i + 1} mismatch: expected ${JSON.stringify(want ?? "(none)")}, ` +
          `found ${JSON.stringify(got ?? "(none)")}`,
        offender,
      );
    }
  }
}

/** Numeric values of one column; blank cells become NaN. */
export function numericColumn(table: Table, name: string): number[] {
  if (!table.columns.includes(name)) {
    throw new SchemaError(`missing column ${JSON.stringify(name)}`, name);
  }
  return table.rows.map((row) => {
    const cell = row[name];
    return cell === "" || cell === undefined ? NaN : Number(cell);
  });
}

// Harness CSV schemas (public contracts of the simulation package).
export const SWEEP_COLUMNS = [
  "density",
  "d",
  "omega_c",
  "gamma_eit_fwhm",
  "delta_t_abs",
  "t_opt",
  "eta_stored",
  "eta_slow",
  "eta_leakage",
  "tau_coherence",
  "error",
];

export const RADTRAP_COLUMNS = [
  "density",
  "mean_scatters",
  "rise_time_ns",
  "p_dep",
  "fwhm_proxy",
];

export const TRACE_COLUMNS = [
  "t",
  "input_intensity",
  "output_intensity",
  "control_omega",
];
