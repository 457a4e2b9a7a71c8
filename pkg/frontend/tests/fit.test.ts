import { describe, expect, it } from "vitest";

import { linearFit, logLogSlope } from "../src/fit";

describe("linearFit", () => {
  it("recovers an exact line", () => {
    const x = [0, 1, 2, 3, 4];
    const y = x.map((v) => 2.5 * v - 1.0);
    const fit = linearFit(x, y);
    expect(fit.slope).toBeCloseTo(2.5, 12);
    expect(fit.intercept).toBeCloseTo(-1.0, 12);
    expect(fit.r2).toBeCloseTo(1.0, 12);
  });

  it("reports reduced r2 for noisy data", () => {
    const x = [0, 1, 2, 3];
    const y = [0, 2, 1, 3];
    const fit = linearFit(x, y);
    expect(fit.r2).toBeLessThan(1.0);
    expect(fit.r2).toBeGreaterThan(0.0);
  });

  it("rejects degenerate input", () => {
    expect(() => linearFit([1], [2])).toThrow();
    expect(() => linearFit([1, 1], [2, 3])).toThrow();
  });
});

describe("logLogSlope", () => {
  it("measures power-law exponents", () => {
    const x = [1, 10, 100, 1000];
    const y = x.map((v) => 3.0 * Math.sqrt(v));
    expect(logLogSlope(x, y).slope).toBeCloseTo(0.5, 10);
  });

  it("ignores non-positive points", () => {
    const x = [1, 10, 100, -5, 0];
    const y = [2, 20, 200, 7, 7];
    expect(logLogSlope(x, y).slope).toBeCloseTo(1.0, 10);
  });
});
