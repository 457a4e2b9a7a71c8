import { describe, expect, it } from "vitest";

import {
  SWEEP_COLUMNS,
  SchemaError,
  numericColumn,
  parseCsv,
  readTable,
  requireColumns,
} from "../src/csv";

describe("parseCsv", () => {
  it("splits CRLF rows and fields", () => {
    expect(parseCsv("a,b\r\n1,2\r\n")).toEqual([
      ["a", "b"],
      ["1", "2"],
    ]);
  });

  it("accepts bare LF line endings too", () => {
    expect(parseCsv("a,b\n1,2\n")).toEqual([
      ["a", "b"],
      ["1", "2"],
    ]);
  });

  it("handles quoted fields with embedded commas and quotes", () => {
    expect(parseCsv('a,b\r\n"x,y","he said ""hi"""\r\n')).toEqual([
      ["a", "b"],
      ["x,y", 'he said "hi"'],
    ]);
  });

  it("keeps empty trailing fields", () => {
    expect(parseCsv("a,b,c\r\n1,,\r\n")).toEqual([
      ["a", "b", "c"],
      ["1", "", ""],
    ]);
  });
});

describe("readTable", () => {
  it("maps rows onto header names", () => {
    const table = readTable("x,y\r\n1,2\r\n3,4\r\n");
    expect(table.columns).toEqual(["x", "y"]);
    expect(table.rows).toEqual([
      { x: "1", y: "2" },
      { x: "3", y: "4" },
    ]);
  });

  it("rejects empty text", () => {
    expect(() => readTable("")).toThrow(SchemaError);
  });
});

describe("requireColumns", () => {
  it("accepts the exact harness schema", () => {
    const table = readTable(SWEEP_COLUMNS.join(",") + "\r\n");
    expect(() => requireColumns(table, SWEEP_COLUMNS)).not.toThrow();
  });

  it("names the offending column on mismatch", () => {
    const wrong = [...SWEEP_COLUMNS];
    wrong[3] = "gamma_fwhm";
    const table = readTable(wrong.join(",") + "\r\n");
    let caught: SchemaError | undefined;
    try {
      requireColumns(table, SWEEP_COLUMNS);
    } catch (err) {
      caught = err as SchemaError;
    }
    expect(caught).toBeInstanceOf(SchemaError);
    expect(caught!.column).toBe("gamma_fwhm");
    expect(caught!.message).toContain("gamma_eit_fwhm");
  });

  it("flags missing trailing columns", () => {
    const table = readTable(SWEEP_COLUMNS.slice(0, -1).join(",") + "\r\n");
    expect(() => requireColumns(table, SWEEP_COLUMNS)).toThrow(SchemaError);
  });

  it("flags extra columns", () => {
    const table = readTable(SWEEP_COLUMNS.join(",") + ",extra\r\n");
    expect(() => requireColumns(table, SWEEP_COLUMNS)).toThrow(/extra/);
  });
});

describe("numericColumn", () => {
  it("parses numbers and maps blanks to NaN", () => {
    const table = readTable("v\r\n1.5\r\n\r\n2e3\r\n");
    // note: the blank line is dropped by the parser, so construct explicitly
    const padded = readTable("v,w\r\n1.5,\r\n2e3,3\r\n");
    expect(numericColumn(padded, "v")).toEqual([1.5, 2000]);
    expect(Number.isNaN(numericColumn(padded, "w")[0])).toBe(true);
    expect(() => numericColumn(table, "nope")).toThrow(SchemaError);
  });
});
