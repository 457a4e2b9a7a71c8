import { mkdtempSync, readFileSync, writeFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterEach, describe, expect, it, vi } from "vitest";

import { SWEEP_COLUMNS } from "../src/csv";
import { EXIT_EMPTY, EXIT_OK, EXIT_USAGE, run } from "../src/cli";

const TESTDATA = join(__dirname, "..", "testdata");
const SWEEP = join(TESTDATA, "sweep_ideal.csv");
const REFERENCE = join(TESTDATA, "sweep_reference.csv");
const RADTRAP = join(TESTDATA, "radtrap.csv");
const TRACES = join(TESTDATA, "store_traces.csv");

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "eitlab-figures-"));
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("render command", () => {
  it("renders all four families from golden CSVs", () => {
    const dir = tempDir();
    const jobs: [string, string[]][] = [
      ["scaling", [SWEEP]],
      ["efficiency", [REFERENCE]],
      ["accounting", [REFERENCE, TRACES]],
      ["trapping", [RADTRAP]],
    ];
    for (const [family, inputs] of jobs) {
      const out = join(dir, `${family}.svg`);
      const argv = ["render", "--family", family, "--out", out];
      for (const input of inputs) {
        argv.push("--in", input);
      }
      expect(run(argv)).toBe(EXIT_OK);
      const svg = readFileSync(out, "utf-8");
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain("config ");
    }
  });

  it("writes the annotation JSON with the scaling slope in band", () => {
    const dir = tempDir();
    const out = join(dir, "scaling.svg");
    const notes = join(dir, "annotations.json");
    const rc = run([
      "render", "--family", "scaling", "--in", SWEEP, "--out", out,
      "--annotations", notes,
    ]);
    expect(rc).toBe(EXIT_OK);
    const annotations = JSON.parse(readFileSync(notes, "utf-8"));
    expect(Math.abs(annotations.gamma_eit_fwhm_slope + 0.5)).toBeLessThanOrEqual(0.05);
  });

  it("uses the config hash from a harness JSON summary", () => {
    const dir = tempDir();
    const meta = join(dir, "summary.json");
    writeFileSync(
      meta,
      JSON.stringify({ config_sha256: "abcdef0123456789deadbeef" }),
      "utf-8",
    );
    const out = join(dir, "fig.svg");
    const rc = run([
      "render", "--family", "scaling", "--in", SWEEP, "--out", out,
      "--meta", meta,
    ]);
    expect(rc).toBe(EXIT_OK);
    expect(readFileSync(out, "utf-8")).toContain("config abcdef012345");
  });

  it("warns and writes nothing for a header-only CSV", () => {
    const dir = tempDir();
    const empty = join(dir, "empty.csv");
    writeFileSync(empty, SWEEP_COLUMNS.join(",") + "\r\n", "utf-8");
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    const out = join(dir, "fig.svg");
    const rc = run(["render", "--family", "scaling", "--in", empty, "--out", out]);
    expect(rc).toBe(EXIT_EMPTY);
    expect(existsSync(out)).toBe(false);
    expect(err.mock.calls.some((c) => String(c[0]).includes("no data rows"))).toBe(true);
  });

  it("aborts naming the offending column on schema mismatch", () => {
    const dir = tempDir();
    const bad = join(dir, "bad.csv");
    const wrong = [...SWEEP_COLUMNS];
    wrong[0] = "densty";
    writeFileSync(bad, wrong.join(",") + "\r\n1,2,3,4,5,6,7,8,9,10,\r\n", "utf-8");
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    const rc = run(["render", "--family", "scaling", "--in", bad, "--out", join(dir, "x.svg")]);
    expect(rc).toBe(EXIT_USAGE);
    expect(err.mock.calls.some((c) => String(c[0]).includes("densty"))).toBe(true);
  });

  it("rejects usage errors", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(run(["render", "--family", "nope", "--in", SWEEP, "--out", "x.svg"])).toBe(
      EXIT_USAGE,
    );
    expect(run(["render", "--family", "scaling"])).toBe(EXIT_USAGE);
    expect(run(["paint"])).toBe(EXIT_USAGE);
    expect(err).toHaveBeenCalled();
  });

  it("is idempotent: re-rendering produces identical bytes", () => {
    const dir = tempDir();
    const out1 = join(dir, "a.svg");
    const out2 = join(dir, "b.svg");
    const argv = (out: string) => [
      "render", "--family", "trapping", "--in", RADTRAP, "--out", out,
    ];
    expect(run(argv(out1))).toBe(EXIT_OK);
    expect(run(argv(out2))).toBe(EXIT_OK);
    expect(readFileSync(out1, "utf-8")).toBe(readFileSync(out2, "utf-8"));
  });
});
